/** Three-column workspace controller: owns state, talks to the API, renders. */

import { ApiError } from "./api.js";
import type { ApiSurface } from "./api.js";
import { clear, el } from "./dom.js";
import { layoutPages, scrollTargetFor } from "./geometry.js";
import { renderDraftPane } from "./panes/draftPane.js";
import { renderNotesPane } from "./panes/notesPane.js";
import { renderPdfPane } from "./panes/pdfPane.js";
import { renderPopup } from "./panes/popups.js";
import type { PageRenderer } from "./pdfRender.js";
import { BoxRenderer } from "./pdfRender.js";
import {
  acknowledge,
  applyOutlineFrame,
  applyTrace,
  closePopup,
  freshChecklist,
  initialState,
  openPopup,
  selectionActionable,
  setSelection,
  toggleSectionCues,
  withAnnotations,
  withSectionCues,
} from "./state.js";
import type { PendingSelection, ViewState } from "./state.js";
import type { Aspect, Criterion, Cue, Frame, StructureTag, TraceResult } from "./types.js";

export interface WorkspaceOptions {
  zoom?: number;
  renderer?: PageRenderer;
  /** Called after every render; tests hook this. */
  onRender?: (state: ViewState) => void;
}

export class Workspace {
  state: ViewState = initialState();
  zoom: number;
  renderer: PageRenderer;
  private pdfPane: HTMLElement;
  private notesPane: HTMLElement;
  private draftPane: HTMLElement;
  private popupLayer: HTMLElement;
  private onRender?: (state: ViewState) => void;

  constructor(
    root: HTMLElement,
    private api: ApiSurface,
    options: WorkspaceOptions = {},
  ) {
    this.zoom = options.zoom ?? 1.0;
    this.renderer = options.renderer ?? new BoxRenderer(1);
    this.onRender = options.onRender;
    clear(root);
    root.classList.add("workspace");
    this.pdfPane = el("section", { class: "pdf-pane" });
    this.notesPane = el("section", { class: "notes-pane" });
    this.draftPane = el("section", { class: "draft-pane" });
    this.popupLayer = el("div", { class: "popup-layer" });
    root.append(this.pdfPane, this.notesPane, this.draftPane, this.popupLayer);
  }

  private set(next: ViewState): void {
    this.state = next;
    this.render();
  }

  private fail(error: unknown): void {
    const message =
      error instanceof ApiError
        ? `${error.code}: ${error.message}`
        : String(error);
    this.set({ ...this.state, lastError: message, busy: false });
  }

  // -- loading ---------------------------------------------------------------

  async load(docId: string, sessionId?: string): Promise<void> {
    const doc = await this.api.getDocument(docId);
    let sid = sessionId ?? null;
    if (!sid) {
      const session = await this.api.createSession(docId);
      sid = session.session_id;
    }
    const annotations = await this.api.listAnnotations(docId);
    this.set({
      ...withAnnotations({ ...this.state, doc, sessionId: sid }, annotations),
    });
  }

  private async refreshAnnotations(): Promise<void> {
    if (!this.state.doc) return;
    const annotations = await this.api.listAnnotations(this.state.doc.doc_id);
    this.set(withAnnotations(this.state, annotations));
  }

  // -- selection and annotation flow ------------------------------------------

  setSelection(selection: PendingSelection | null): void {
    this.set(setSelection(this.state, selection));
  }

  get selectionEnabled(): boolean {
    return selectionActionable(this.state.selection);
  }

  async saveHighlightWithNote(
    text: string,
    structureTag: StructureTag,
    criteriaTag?: Aspect,
  ): Promise<void> {
    const { doc, selection, sessionId } = this.state;
    if (!doc || !selectionActionable(selection)) return;
    try {
      const highlight = await this.api.createHighlight(
        doc.doc_id,
        selection!.rects,
        selection!.text,
        sessionId ?? undefined,
      );
      await this.api.createNote(
        highlight.highlight_id,
        text,
        structureTag,
        criteriaTag,
        sessionId ?? undefined,
      );
      this.set(setSelection(this.state, null));
      await this.refreshAnnotations();
    } catch (error) {
      this.fail(error);
    }
  }

  async deleteNote(noteId: string): Promise<void> {
    try {
      await this.api.deleteNote(noteId, this.state.sessionId ?? undefined);
      await this.refreshAnnotations();
    } catch (error) {
      this.fail(error);
    }
  }

  // -- cues ---------------------------------------------------------------------

  async toggleSectionCues(index: number): Promise<void> {
    const wasVisible = this.state.visibleSectionCues[index];
    this.set(toggleSectionCues(this.state, index));
    if (wasVisible || this.state.sectionCues[index]) return;
    try {
      const cues: Cue[] = [];
      for await (const frame of this.api.sectionCues(
        this.state.doc!.doc_id,
        index,
        this.state.sessionId ?? undefined,
      )) {
        if (frame.kind === "done") {
          cues.push(...(frame.result as Cue[]));
        } else if (frame.kind === "error") {
          throw new ApiError(frame.code, frame.message, 502);
        }
      }
      this.set(withSectionCues(this.state, index, cues));
    } catch (error) {
      this.fail(error);
    }
  }

  async answerCue(cueId: string, answer: string): Promise<void> {
    try {
      await this.api.answerCue(cueId, answer, this.state.sessionId ?? undefined);
    } catch (error) {
      this.fail(error);
    }
  }

  /** Lightbulb flow: open the aspect picker for the current selection. */
  async requestPhraseCue(): Promise<void> {
    const { doc, selection, sessionId } = this.state;
    if (!doc || !selectionActionable(selection)) return;
    try {
      const highlight = await this.api.createHighlight(
        doc.doc_id,
        selection!.rects,
        selection!.text,
        sessionId ?? undefined,
      );
      this.set(
        openPopup(this.state, {
          kind: "phrase_cue",
          highlightId: highlight.highlight_id,
          aspect: null,
          question: null,
          streaming: false,
        }),
      );
      await this.refreshAnnotations();
    } catch (error) {
      this.fail(error);
    }
  }

  async pickAspect(highlightId: string, aspect: Aspect): Promise<void> {
    this.set(
      openPopup(this.state, {
        kind: "phrase_cue",
        highlightId,
        aspect,
        question: null,
        streaming: true,
      }),
    );
    try {
      let question: string | null = null;
      for await (const frame of this.api.phraseCue(
        highlightId,
        aspect,
        this.state.sessionId ?? undefined,
      )) {
        if (frame.kind === "done") {
          question = (frame.result as Cue).question;
        } else if (frame.kind === "error") {
          throw new ApiError(frame.code, frame.message, 502);
        }
      }
      if (this.state.popup.kind === "phrase_cue") {
        this.set(
          openPopup(this.state, {
            kind: "phrase_cue",
            highlightId,
            aspect,
            question,
            streaming: false,
          }),
        );
      }
    } catch (error) {
      this.fail(error);
    }
  }

  // -- citations -----------------------------------------------------------------

  async showCitationCard(refId: string): Promise<void> {
    if (!this.state.doc) return;
    try {
      const card = await this.api.citationCard(
        this.state.doc.doc_id,
        refId,
        this.state.sessionId ?? undefined,
      );
      this.set(openPopup(this.state, { kind: "citation_card", card }));
    } catch (error) {
      this.fail(error);
    }
  }

  async showRecommendations(): Promise<void> {
    if (!this.state.doc) return;
    try {
      const items = await this.api.recommendations(
        this.state.doc.doc_id,
        this.state.sessionId ?? undefined,
      );
      this.set(openPopup(this.state, { kind: "recommendations", items }));
    } catch (error) {
      this.fail(error);
    }
  }

  // -- synthesis -----------------------------------------------------------------

  private async consumeOutlineStream(frames: AsyncGenerator<Frame>): Promise<void> {
    this.set({ ...this.state, busy: true, lastError: null, streamingDraftBuffer: "" });
    try {
      for await (const frame of frames) {
        this.set(applyOutlineFrame(this.state, frame));
      }
    } catch (error) {
      this.fail(error);
    }
  }

  async summarize(): Promise<void> {
    if (!this.state.sessionId || this.state.busy) return;
    await this.consumeOutlineStream(this.api.summarize(this.state.sessionId));
  }

  async expand(): Promise<void> {
    const { sessionId, draft } = this.state;
    if (!sessionId || !draft || draft.expanded || this.state.busy) return;
    await this.consumeOutlineStream(this.api.expand(sessionId, draft.draft_id));
  }

  async clickBullet(itemId: string): Promise<void> {
    const draft = this.state.draft;
    if (!draft) return;
    try {
      const trace: TraceResult = await this.api.trace(
        draft.draft_id,
        itemId,
        this.state.sessionId ?? undefined,
      );
      this.set(
        applyTrace(
          this.state,
          trace.rects,
          trace.notes.map((n) => n.note_id),
        ),
      );
      this.scrollToRects(trace);
    } catch (error) {
      this.fail(error);
    }
  }

  private scrollToRects(trace: TraceResult): void {
    const layout = layoutPages(
      Math.max(1, ...trace.rects.map((r) => r.page)),
      this.zoom,
      this.renderer.pageSize(1).height,
    );
    const target = scrollTargetFor(trace.rects, layout);
    if (target !== null) this.pdfPane.scrollTop = target;
  }

  // -- reflection and submit ----------------------------------------------------------

  async openReflection(): Promise<void> {
    const { draft, draftText } = this.state;
    if (!draft) return;
    try {
      const gate = await this.api.reflection(draft.draft_id, draftText);
      const checklist = freshChecklist();
      for (const key of Object.keys(gate.items)) {
        if (key in checklist) checklist[key as Criterion] = gate.items[key];
      }
      this.set(openPopup(this.state, { kind: "reflection", checklist }));
    } catch (error) {
      this.fail(error);
    }
  }

  acknowledgeCriterion(criterion: Criterion): void {
    this.set(acknowledge(this.state, criterion));
  }

  async confirmSubmit(): Promise<void> {
    const popup = this.state.popup;
    if (popup.kind !== "reflection" || !this.state.sessionId) return;
    try {
      await this.api.submit(this.state.sessionId, this.state.draftText, popup.checklist);
      this.set(closePopup({ ...this.state, submitted: true }));
    } catch (error) {
      this.fail(error);
    }
  }

  closePopup(): void {
    this.set(closePopup(this.state));
  }

  setDraftText(text: string): void {
    // direct mutation, no re-render: the textarea already holds the text
    this.state = { ...this.state, draftText: text };
  }

  logFocus(): void {
    if (this.state.sessionId && !this.state.submitted) {
      void this.api.logEvent(this.state.sessionId, "draft_edit_focus").catch(() => {});
    }
  }

  logBlur(): void {
    if (this.state.sessionId && !this.state.submitted) {
      void this.api.logEvent(this.state.sessionId, "draft_edit_blur").catch(() => {});
    }
  }

  // -- rendering ---------------------------------------------------------------------

  render(): void {
    renderPdfPane(this.pdfPane, this.state, this.zoom, this.renderer, {
      onCitationClick: (refId) => void this.showCitationCard(refId),
      onCueChipToggle: (index) => void this.toggleSectionCues(index),
      onCueAnswer: (cueId, answer) => void this.answerCue(cueId, answer),
    });
    renderNotesPane(this.notesPane, this.state, {
      onNoteClick: (highlightId) =>
        this.set({ ...this.state, selectedHighlight: highlightId }),
      onNoteDelete: (noteId) => void this.deleteNote(noteId),
    });
    renderDraftPane(this.draftPane, this.state, {
      onSummarize: () => void this.summarize(),
      onExpand: () => void this.expand(),
      onBulletClick: (itemId) => void this.clickBullet(itemId),
      onDraftEdited: (text) => this.setDraftText(text),
      onDraftFocus: () => this.logFocus(),
      onDraftBlur: () => this.logBlur(),
      onSubmitRequested: () => void this.openReflection(),
      onRetry: () => void this.summarize(),
    });
    renderPopup(this.popupLayer, this.state.popup, {
      onClose: () => this.closePopup(),
      onAspectPicked: (highlightId, aspect) =>
        void this.pickAspect(highlightId, aspect),
      onAcknowledge: (criterion) => this.acknowledgeCriterion(criterion),
      onConfirmSubmit: () => void this.confirmSubmit(),
    });
    this.onRender?.(this.state);
  }
}
