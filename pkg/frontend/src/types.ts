/** JSON shapes served by the review service. */

export interface PageRect {
  page: number;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface TextSpan {
  span_id: string;
  text: string;
  page: number;
  rects: PageRect[];
}

export interface Section {
  index: number;
  heading: string;
  spans: TextSpan[];
}

export interface Reference {
  ref_id: string;
  raw: string;
  parsed_title: string | null;
  doi: string | null;
  year: number | null;
}

export interface InlineCitation {
  span: TextSpan;
  target: string | null;
  tei_pointer: string | null;
}

export interface ParsedDocument {
  doc_id: string;
  title: string;
  abstract: string;
  sections: Section[];
  references: Reference[];
  inline_citations: InlineCitation[];
  word_count: number;
  keywords: string[];
  venue: string | null;
}

export interface Highlight {
  highlight_id: string;
  doc_id: string;
  rects: PageRect[];
  extracted_text: string;
  created_at: string;
}

export type StructureTag = "summary" | "strength" | "weakness" | "other";
export type Aspect = "importance" | "novelty" | "validity" | "clarity";

export const ASPECTS: readonly Aspect[] = [
  "importance",
  "novelty",
  "validity",
  "clarity",
];

export interface Note {
  note_id: string;
  highlight_id: string;
  text: string;
  structure_tag: StructureTag;
  criteria_tag: Aspect | null;
  created_at: string;
  edited_at: string;
}

export interface AnnotationPair {
  highlight: Highlight;
  note: Note | null;
}

export interface Cue {
  cue_id: string;
  doc_id: string;
  scope: {
    kind: "section" | "phrase";
    section_index: number | null;
    highlight_id: string | null;
  };
  aspect: Aspect;
  question: string;
  word_count: number;
  answered: boolean;
  answer_text: string | null;
}

export interface CitationCard {
  ref_id: string;
  title: string;
  publication_date: string | null;
  doi_link: string | null;
  tldr: string;
  fetched_at: string;
}

export interface Recommendation {
  external_paper_id: string;
  title: string;
  venue: string | null;
  year: number | null;
  doi: string | null;
}

export interface OutlineItem {
  item_id: string;
  topic: string;
  detail: string | null;
  provenance: string[];
  needs_revision: boolean;
}

export interface OutlineDraft {
  draft_id: string;
  doc_id: string;
  summary_bullets: string[];
  strength_items: OutlineItem[];
  weakness_items: OutlineItem[];
  created_at: string;
  expanded: boolean;
  draft_text?: string;
}

export interface TraceResult {
  item_id: string;
  notes: { note_id: string; text: string }[];
  rects: PageRect[];
}

export const REFLECTION_CRITERIA = [
  "tone",
  "comprehensive",
  "constructive",
  "justified",
  "accurate",
] as const;

export type Criterion = (typeof REFLECTION_CRITERIA)[number];

export interface SessionInfo {
  session_id: string;
  doc_id: string;
  condition_label: string | null;
  started_at: string;
  submitted_at: string | null;
  final_review_text: string | null;
  checklist: Record<string, boolean> | null;
  latest_draft_id: string | null;
}

/** Frames of the service's newline-delimited streaming endpoints. */
export type Frame =
  | { kind: "partial"; field: string; index: number | null; value: unknown }
  | { kind: "done"; result: unknown }
  | { kind: "error"; code: string; message: string };
