"""Admin command line: serve, ingest, cues, outline, export."""

from __future__ import annotations

import json
from pathlib import Path

import click

from ..errors import ReviewDeskError
from ..ingest import locate, parse_tei
from ..synthesis import render_draft_text
from .app import build_state, create_app
from .config import ServiceConfig


@click.group()
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
@click.option("--provider-url", default=None, help="Chat-completion endpoint.")
@click.option("--provider-key", default=None)
@click.option("--provider-model", default=None)
@click.option("--metadata-url", default=None, help="Scholarly-metadata endpoint.")
@click.option("--metadata-key", default=None)
@click.option("--extraction-url", default=None, help="PDF structure-extraction service.")
@click.option("--replay-dir", type=click.Path(path_type=Path), default=None,
              help="Recorded-transcript directory; replaces the live provider.")
@click.option("--recorded-metadata", type=click.Path(path_type=Path), default=None)
@click.option("--venue", "default_venue", default=None)
@click.pass_context
def main(ctx, **options):
    """Peer-review scaffolding service. Flags override REVIEWDESK_* env vars."""
    ctx.obj = ServiceConfig.from_env(**options)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.pass_obj
def serve(config: ServiceConfig, host: str, port: int):
    """Run the HTTP service."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("pdf", type=click.Path(exists=True, path_type=Path))
@click.option("--venue", default=None, help="Venue override for recommendations.")
@click.option("--tei-file", type=click.Path(exists=True, path_type=Path), default=None,
              help="Use this TEI instead of calling the extraction service.")
@click.pass_obj
def ingest(config: ServiceConfig, pdf: Path, venue: str | None, tei_file: Path | None):
    """Extract and parse a paper PDF; prints the document id."""
    state = build_state(config)
    if tei_file is not None:
        tei = tei_file.read_bytes()
    else:
        if state.extractor is None:
            raise click.UsageError("no extraction service configured (--extraction-url)")
        tei = state.extractor.extract(pdf.read_bytes())
    doc = parse_tei(tei)
    state.documents.add(doc, pdf=pdf.read_bytes())
    state.annotations.register_document(doc.doc_id)
    if venue and state.citations is not None:
        state.citations.set_venue(doc.doc_id, venue)
    click.echo(doc.doc_id)
    click.echo(f"title: {doc.title}", err=True)
    click.echo(f"sections: {len(doc.sections)}  words: {doc.word_count}", err=True)


@main.command()
@click.argument("doc_id")
@click.option("--section", "section_index", type=int, default=None,
              help="One section only; default generates for all sections.")
@click.pass_obj
def cues(config: ServiceConfig, doc_id: str, section_index: int | None):
    """Generate (or fetch cached) contextual cues for a document."""
    state = build_state(config)
    doc = state.documents.get(doc_id)
    indexes = [section_index] if section_index is not None else [
        s.index for s in doc.sections
    ]
    for index in indexes:
        heading = doc.sections[index].heading or f"section {index}"
        click.echo(f"[{index}] {heading}")
        try:
            for cue in state.cues.section_cues(doc_id, index):
                click.echo(f"  {cue.aspect}: {cue.question}")
        except ReviewDeskError as exc:
            click.echo(f"  error: {exc.code}: {exc.message}", err=True)


@main.command()
@click.argument("doc_id")
@click.option("--notes", "notes_file", type=click.Path(exists=True, path_type=Path),
              required=True, help="JSON list of notes to synthesize.")
@click.option("--expand/--no-expand", "do_expand", default=False)
@click.pass_obj
def outline(config: ServiceConfig, doc_id: str, notes_file: Path, do_expand: bool):
    """Synthesize a notes file into an outline and print it.

    Each note entry: {"text", "structure_tag", "criteria_tag"?, "excerpt"?,
    "span_query"?} where span_query anchors the highlight to the first
    document span containing that text.
    """
    state = build_state(config)
    doc = state.documents.get(doc_id)
    spans = [sp for sec in doc.sections for sp in sec.spans]
    for entry in json.loads(notes_file.read_text()):
        span = spans[0]
        query = entry.get("span_query")
        if query:
            span = next((sp for sp in spans if query in sp.text), spans[0])
        h = state.annotations.create_highlight(
            doc_id, locate(doc, span.span_id), entry.get("excerpt") or span.text
        )
        state.annotations.create_note(
            h.highlight_id,
            entry["text"],
            entry["structure_tag"],
            entry.get("criteria_tag"),
        )
    draft = state.synthesis.summarize_notes(doc_id)
    if do_expand:
        draft = state.synthesis.expand_outline(draft.draft_id)
    click.echo(render_draft_text(draft))
    click.echo(f"draft_id: {draft.draft_id}", err=True)


@main.command()
@click.argument("session_id")
@click.option("--format", "fmt", type=click.Choice(["md", "txt"]), default="md")
@click.option("--output", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def export(config: ServiceConfig, session_id: str, fmt: str, output: Path | None):
    """Export a submitted review as Markdown or plain text."""
    from .sessions import export_review

    state = build_state(config)
    session = state.sessions.get(session_id)
    if not session.submitted:
        raise click.ClickException(f"session {session_id} has not been submitted")
    text = export_review(session, fmt)
    if output is not None:
        output.write_text(text)
        click.echo(f"wrote {output}", err=True)
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
