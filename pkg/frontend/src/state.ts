/** Workspace view state and its transition rules.

The state is a plain object updated by pure functions, so every interaction
rule (popup exclusivity, streaming buffer lifecycle, trace highlighting,
reflection gating) is testable without a DOM.
*/

import type {
  AnnotationPair,
  Aspect,
  CitationCard,
  Criterion,
  Cue,
  Frame,
  OutlineDraft,
  OutlineItem,
  PageRect,
  ParsedDocument,
  Recommendation,
} from "./types.js";
import { REFLECTION_CRITERIA } from "./types.js";

export const SUMMARIZE_AFTER_NOTES = 2;

export type Popup =
  | { kind: "none" }
  | {
      kind: "phrase_cue";
      highlightId: string;
      aspect: Aspect | null;
      question: string | null;
      streaming: boolean;
    }
  | { kind: "citation_card"; card: CitationCard }
  | { kind: "recommendations"; items: Recommendation[] }
  | { kind: "reflection"; checklist: Record<Criterion, boolean> };

export interface PendingSelection {
  text: string;
  rects: PageRect[];
}

export interface ViewState {
  doc: ParsedDocument | null;
  sessionId: string | null;
  annotations: AnnotationPair[];
  sectionCues: Record<number, Cue[]>;
  /** Per-section chip toggle; cues start collapsed. */
  visibleSectionCues: Record<number, boolean>;
  selection: PendingSelection | null;
  selectedHighlight: string | null;
  /** Raw text accumulated while an outline/expansion stream is open. */
  streamingDraftBuffer: string;
  draft: OutlineDraft | null;
  /** The editable review text (user-owned; streaming only replaces it on done). */
  draftText: string;
  /** Rects highlighted by the last bullet click; replaced wholesale. */
  tracedRects: PageRect[];
  tracedNoteIds: string[];
  popup: Popup;
  busy: boolean;
  submitted: boolean;
  lastError: string | null;
}

export function initialState(): ViewState {
  return {
    doc: null,
    sessionId: null,
    annotations: [],
    sectionCues: {},
    visibleSectionCues: {},
    selection: null,
    selectedHighlight: null,
    streamingDraftBuffer: "",
    draft: null,
    draftText: "",
    tracedRects: [],
    tracedNoteIds: [],
    popup: { kind: "none" },
    busy: false,
    submitted: false,
    lastError: null,
  };
}

// -- popups (at most one pending) ---------------------------------------------

export function openPopup(state: ViewState, popup: Popup): ViewState {
  return { ...state, popup };
}

export function closePopup(state: ViewState): ViewState {
  return { ...state, popup: { kind: "none" } };
}

export function freshChecklist(): Record<Criterion, boolean> {
  return Object.fromEntries(
    REFLECTION_CRITERIA.map((c) => [c, false]),
  ) as Record<Criterion, boolean>;
}

export function acknowledge(
  state: ViewState,
  criterion: Criterion,
): ViewState {
  if (state.popup.kind !== "reflection") return state;
  const checklist = { ...state.popup.checklist, [criterion]: true };
  return { ...state, popup: { kind: "reflection", checklist } };
}

export function checklistComplete(checklist: Record<string, boolean>): boolean {
  return (
    REFLECTION_CRITERIA.every((c) => checklist[c] === true) &&
    Object.keys(checklist).length === REFLECTION_CRITERIA.length
  );
}

// -- selection and notes ---------------------------------------------------------

/** The selection toolbar is enabled only for selections with real text. */
export function selectionActionable(selection: PendingSelection | null): boolean {
  return selection !== null && selection.text.trim().length > 0 && selection.rects.length > 0;
}

export function setSelection(
  state: ViewState,
  selection: PendingSelection | null,
): ViewState {
  return { ...state, selection };
}

export function noteCount(state: ViewState): number {
  return state.annotations.filter((pair) => pair.note !== null).length;
}

/** The Summarize Notes button appears once enough notes exist. */
export function summarizeVisible(state: ViewState): boolean {
  return !state.submitted && noteCount(state) >= SUMMARIZE_AFTER_NOTES;
}

export function withAnnotations(
  state: ViewState,
  annotations: AnnotationPair[],
): ViewState {
  return { ...state, annotations };
}

// -- section cues ------------------------------------------------------------------

export function toggleSectionCues(state: ViewState, index: number): ViewState {
  const visible = { ...state.visibleSectionCues };
  visible[index] = !visible[index];
  return { ...state, visibleSectionCues: visible };
}

export function withSectionCues(
  state: ViewState,
  index: number,
  cues: Cue[],
): ViewState {
  return { ...state, sectionCues: { ...state.sectionCues, [index]: cues } };
}

// -- streaming draft ------------------------------------------------------------------

function provenancedOnly(draft: OutlineDraft): OutlineDraft {
  const keep = (items: OutlineItem[]) =>
    items.filter((item) => item.provenance.length > 0);
  return {
    ...draft,
    strength_items: keep(draft.strength_items),
    weakness_items: keep(draft.weakness_items),
  };
}

/** Fold one streaming frame into the state.

Partials append a preview line to the streaming buffer; done installs the
draft (dropping any item without provenance) and replaces the editable text
with the rendered outline; both terminals clear the buffer.
*/
export function applyOutlineFrame(state: ViewState, frame: Frame): ViewState {
  if (frame.kind === "partial") {
    const line = previewLine(frame.field, frame.value);
    return {
      ...state,
      busy: true,
      streamingDraftBuffer: state.streamingDraftBuffer + line,
    };
  }
  if (frame.kind === "done") {
    const raw = frame.result as OutlineDraft;
    const draft = provenancedOnly(raw);
    return {
      ...state,
      busy: false,
      streamingDraftBuffer: "",
      draft,
      draftText: draft.draft_text ?? renderOutlineText(draft),
    };
  }
  return {
    ...state,
    busy: false,
    streamingDraftBuffer: "",
    lastError: `${frame.code}: ${frame.message}`,
  };
}

function previewLine(field: string, value: unknown): string {
  if (typeof value === "string") return `${value}\n`;
  if (value && typeof value === "object" && "topic" in value) {
    const item = value as { topic: string; detail?: string | null };
    return item.detail ? `- ${item.topic}\n  - ${item.detail}\n` : `- ${item.topic}\n`;
  }
  return "";
}

export function renderOutlineText(draft: OutlineDraft): string {
  const lines: string[] = ["Summary:"];
  for (const bullet of draft.summary_bullets) lines.push(`- ${bullet}`);
  lines.push("Strengths:");
  for (const item of draft.strength_items) {
    lines.push(`- ${item.topic}`);
    if (item.detail) lines.push(`  - ${item.detail}`);
  }
  lines.push("Weaknesses:");
  for (const item of draft.weakness_items) {
    lines.push(`- ${item.topic}`);
    if (item.detail) lines.push(`  - ${item.detail}`);
  }
  return lines.join("\n");
}

// -- trace highlighting -----------------------------------------------------------------

/** A bullet click replaces the traced rects and note flashes wholesale, so no
stale highlights survive selecting another bullet. */
export function applyTrace(
  state: ViewState,
  rects: PageRect[],
  noteIds: string[],
): ViewState {
  return { ...state, tracedRects: [...rects], tracedNoteIds: [...noteIds] };
}

export function clearTrace(state: ViewState): ViewState {
  return { ...state, tracedRects: [], tracedNoteIds: [] };
}
