/** Shared test data: a small two-page document and a stub API. */

import type { ApiSurface } from "../src/api.js";
import type {
  AnnotationPair,
  CitationCard,
  Cue,
  Frame,
  OutlineDraft,
  PageRect,
  ParsedDocument,
  TraceResult,
} from "../src/types.js";

export function rect(page: number, x0: number, y0: number, x1: number, y1: number): PageRect {
  return { page, x0, y0, x1, y1 };
}

export const DOC: ParsedDocument = {
  doc_id: "doc-test",
  title: "Sharing Presence in Virtual Studying Teams",
  abstract: "A prototype varies video explicitness for studying teams.",
  sections: [
    {
      index: 0,
      heading: "Introduction",
      spans: [
        {
          span_id: "s0.0.0",
          text: "Remote students study together over video.",
          page: 1,
          rects: [rect(1, 50, 120, 290, 132)],
        },
      ],
    },
    {
      index: 1,
      heading: "Method",
      spans: [
        {
          span_id: "s1.0.0",
          text: "We recruited four virtual studying teams.",
          page: 1,
          rects: [rect(1, 50, 420, 280, 432)],
        },
        {
          span_id: "s1.0.1",
          text: "Each team used three video versions.",
          page: 2,
          rects: [rect(2, 50, 90, 270, 102)],
        },
      ],
    },
  ],
  references: [
    {
      ref_id: "b0",
      raw: "Studying Together While Apart. 2021.",
      parsed_title: "Studying Together While Apart",
      doi: "10.1145/3449100",
      year: 2021,
    },
  ],
  inline_citations: [
    {
      span: {
        span_id: "s0.0.0.c0",
        text: "[1]",
        page: 1,
        rects: [rect(1, 292, 120, 308, 132)],
      },
      target: "b0",
      tei_pointer: "#b0",
    },
  ],
  word_count: 20,
  keywords: ["virtual studying"],
  venue: "CSCW Companion",
};

export const CARD: CitationCard = {
  ref_id: "b0",
  title: "Studying Together While Apart",
  publication_date: "2021-06-03",
  doi_link: "https://doi.org/10.1145/3449100",
  tldr: "Remote learners choreograph camera use.",
  fetched_at: "2024-01-01T00:00:00Z",
};

export function annotationPair(
  n: number,
  noteText: string,
  tag: "summary" | "strength" | "weakness" | "other",
  rects: PageRect[] = [rect(1, 50, 420, 280, 432)],
): AnnotationPair {
  return {
    highlight: {
      highlight_id: `h-${n}`,
      doc_id: DOC.doc_id,
      rects,
      extracted_text: `excerpt ${n}`,
      created_at: "2024-01-01T00:00:00Z",
    },
    note: {
      note_id: `n-${n}`,
      highlight_id: `h-${n}`,
      text: noteText,
      structure_tag: tag,
      criteria_tag: null,
      created_at: "2024-01-01T00:00:00Z",
      edited_at: "2024-01-01T00:00:00Z",
    },
  };
}

export const SECTION_CUES: Cue[] = (
  ["importance", "novelty", "validity", "clarity"] as const
).map((aspect, n) => ({
  cue_id: `cue-${n}`,
  doc_id: DOC.doc_id,
  scope: { kind: "section", section_index: 1, highlight_id: null },
  aspect,
  question: `Is the ${aspect} of the method adequately established for this venue?`,
  word_count: 10,
  answered: false,
  answer_text: null,
}));

export const DRAFT: OutlineDraft = {
  draft_id: "d-1",
  doc_id: DOC.doc_id,
  summary_bullets: ["Presence sharing explored for studying teams."],
  strength_items: [
    {
      item_id: "i-s1",
      topic: "Timely problem",
      detail: null,
      provenance: ["n-1"],
      needs_revision: false,
    },
  ],
  weakness_items: [
    {
      item_id: "i-w1",
      topic: "Limited scope of the study sample",
      detail: null,
      provenance: ["n-2"],
      needs_revision: false,
    },
    {
      item_id: "i-w2",
      topic: "Sparse recruitment reporting",
      detail: null,
      provenance: ["n-3"],
      needs_revision: false,
    },
  ],
  created_at: "2024-01-01T00:00:00Z",
  expanded: false,
  draft_text: "Summary:\n- Presence sharing explored for studying teams.",
};

export const TRACE_W1: TraceResult = {
  item_id: "i-w1",
  notes: [{ note_id: "n-2", text: "only four teams studied" }],
  rects: [rect(1, 50, 420, 280, 432), rect(2, 50, 90, 270, 102)],
};

export const TRACE_W2: TraceResult = {
  item_id: "i-w2",
  notes: [{ note_id: "n-3", text: "recruitment details sparse" }],
  rects: [rect(2, 50, 200, 220, 212)],
};

export async function* frameStream(frames: Frame[]): AsyncGenerator<Frame> {
  for (const frame of frames) yield frame;
}

export function outlineFrames(draft: OutlineDraft): Frame[] {
  return [
    { kind: "partial", field: "summary", index: 0, value: draft.summary_bullets[0] },
    { kind: "partial", field: "strengths", index: 0, value: { topic: "Timely problem" } },
    {
      kind: "partial",
      field: "weaknesses",
      index: 0,
      value: { topic: "Limited scope of the study sample" },
    },
    { kind: "done", result: draft },
  ];
}

/** In-memory ApiSurface; every method is overridable per test. */
export function stubApi(overrides: Partial<ApiSurface> = {}): ApiSurface {
  let pairs: AnnotationPair[] = [];
  let nextId = 1;
  const base: ApiSurface = {
    getDocument: async () => DOC,
    cueStatus: async () => ({ "0": "ready", "1": "ready" }),
    sectionCues: (() =>
      frameStream([{ kind: "done", result: SECTION_CUES }])) as ApiSurface["sectionCues"],
    createHighlight: async (docId, rects, extractedText) => {
      const id = `h-${nextId++}`;
      pairs.push({
        highlight: {
          highlight_id: id,
          doc_id: docId,
          rects,
          extracted_text: extractedText,
          created_at: "2024-01-01T00:00:00Z",
        },
        note: null,
      });
      return { highlight_id: id };
    },
    createNote: async (highlightId, text, structureTag) => {
      const id = `n-${nextId++}`;
      const pair = pairs.find((p) => p.highlight.highlight_id === highlightId);
      if (pair) {
        pair.note = {
          note_id: id,
          highlight_id: highlightId,
          text,
          structure_tag: structureTag,
          criteria_tag: null,
          created_at: "2024-01-01T00:00:00Z",
          edited_at: "2024-01-01T00:00:00Z",
        };
      }
      return { note_id: id };
    },
    listAnnotations: async () => pairs,
    deleteNote: async (noteId) => {
      pairs = pairs.filter((p) => p.note?.note_id !== noteId);
    },
    phraseCue: (() =>
      frameStream([
        {
          kind: "done",
          result: {
            ...SECTION_CUES[3],
            scope: { kind: "phrase", section_index: null, highlight_id: "h-1" },
          },
        },
      ])) as ApiSurface["phraseCue"],
    answerCue: async () => SECTION_CUES[0],
    citationCard: async () => CARD,
    recommendations: async () => [],
    createSession: async (docId) => ({
      session_id: "sess-1",
      doc_id: docId,
      condition_label: null,
      started_at: "2024-01-01T00:00:00Z",
      submitted_at: null,
      final_review_text: null,
      checklist: null,
      latest_draft_id: null,
    }),
    logEvent: async () => ({}),
    summarize: (() => frameStream(outlineFrames(DRAFT))) as ApiSurface["summarize"],
    expand: (() =>
      frameStream([{ kind: "done", result: { ...DRAFT, expanded: true } }])) as ApiSurface["expand"],
    trace: async (_draftId, itemId) => (itemId === "i-w2" ? TRACE_W2 : TRACE_W1),
    reflection: async (draftId) => ({
      draft_id: draftId,
      items: {
        tone: false,
        comprehensive: false,
        constructive: false,
        justified: false,
        accurate: false,
      },
    }),
    submit: async (sessionId) => ({
      session_id: sessionId,
      doc_id: DOC.doc_id,
      condition_label: null,
      started_at: "2024-01-01T00:00:00Z",
      submitted_at: "2024-01-01T01:00:00Z",
      final_review_text: "text",
      checklist: null,
      latest_draft_id: "d-1",
    }),
    getDraft: async () => DRAFT,
  };
  return { ...base, ...overrides };
}

export function seedAnnotations(api: ApiSurface, pairs: AnnotationPair[]): ApiSurface {
  return { ...api, listAnnotations: async () => pairs };
}
