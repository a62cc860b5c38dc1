/** Typed client for the review service; the UI's only backend channel. */

import { readFrames } from "./stream.js";
import type {
  AnnotationPair,
  Aspect,
  CitationCard,
  Cue,
  Frame,
  OutlineDraft,
  PageRect,
  ParsedDocument,
  Recommendation,
  SessionInfo,
  StructureTag,
  TraceResult,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

/** The surface the workspace depends on; tests provide stubs of this shape. */
export type ApiSurface = Pick<
  ApiClient,
  | "getDocument"
  | "cueStatus"
  | "sectionCues"
  | "createHighlight"
  | "createNote"
  | "listAnnotations"
  | "deleteNote"
  | "phraseCue"
  | "answerCue"
  | "citationCard"
  | "recommendations"
  | "createSession"
  | "logEvent"
  | "summarize"
  | "expand"
  | "trace"
  | "reflection"
  | "submit"
  | "getDraft"
>;

export class ApiClient {
  constructor(
    private baseUrl = "",
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let code = "HttpError";
      let message = response.statusText;
      try {
        const body = (await response.json()) as { error?: string; message?: string };
        code = body.error ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body
      }
      throw new ApiError(code, message, response.status);
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  private async *stream(path: string, init?: RequestInit): AsyncGenerator<Frame> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok || response.body === null) {
      const body = (await response.json().catch(() => ({}))) as {
        error?: string;
        message?: string;
      };
      throw new ApiError(
        body.error ?? "HttpError",
        body.message ?? response.statusText,
        response.status,
      );
    }
    yield* readFrames(response.body);
  }

  private json(body: unknown): RequestInit {
    return {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    };
  }

  // -- documents ------------------------------------------------------------

  getDocument(docId: string): Promise<ParsedDocument> {
    return this.request(`/documents/${docId}`);
  }

  pdfUrl(docId: string): string {
    return `${this.baseUrl}/documents/${docId}/pdf`;
  }

  cueStatus(docId: string): Promise<Record<string, string>> {
    return this.request(`/documents/${docId}/cues/status`);
  }

  sectionCues(
    docId: string,
    sectionIndex: number,
    sessionId?: string,
  ): AsyncGenerator<Frame> {
    const query = sessionId ? `?session_id=${sessionId}` : "";
    return this.stream(`/documents/${docId}/sections/${sectionIndex}/cues${query}`);
  }

  // -- annotations -----------------------------------------------------------

  createHighlight(
    docId: string,
    rects: PageRect[],
    extractedText: string,
    sessionId?: string,
  ): Promise<{ highlight_id: string } & Record<string, unknown>> {
    return this.request(
      "/highlights",
      this.json({
        doc_id: docId,
        rects,
        extracted_text: extractedText,
        session_id: sessionId ?? null,
      }),
    );
  }

  createNote(
    highlightId: string,
    text: string,
    structureTag: StructureTag,
    criteriaTag?: Aspect,
    sessionId?: string,
  ): Promise<{ note_id: string } & Record<string, unknown>> {
    return this.request(
      `/highlights/${highlightId}/notes`,
      this.json({
        text,
        structure_tag: structureTag,
        criteria_tag: criteriaTag ?? null,
        session_id: sessionId ?? null,
      }),
    );
  }

  listAnnotations(docId: string): Promise<AnnotationPair[]> {
    return this.request(`/documents/${docId}/annotations`);
  }

  deleteNote(noteId: string, sessionId?: string): Promise<void> {
    const query = sessionId ? `?session_id=${sessionId}` : "";
    return this.request(`/notes/${noteId}${query}`, { method: "DELETE" });
  }

  // -- cues --------------------------------------------------------------------

  phraseCue(
    highlightId: string,
    aspect: Aspect,
    sessionId?: string,
  ): AsyncGenerator<Frame> {
    const params = new URLSearchParams({ aspect });
    if (sessionId) params.set("session_id", sessionId);
    return this.stream(`/highlights/${highlightId}/cue?${params}`, {
      method: "POST",
    });
  }

  answerCue(cueId: string, answerText: string, sessionId?: string): Promise<Cue> {
    return this.request(
      `/cues/${cueId}/answer`,
      this.json({ answer_text: answerText, session_id: sessionId ?? null }),
    );
  }

  // -- citations ----------------------------------------------------------------

  citationCard(
    docId: string,
    refId: string,
    sessionId?: string,
  ): Promise<CitationCard> {
    const query = sessionId ? `?session_id=${sessionId}` : "";
    return this.request(`/documents/${docId}/references/${refId}/card${query}`);
  }

  recommendations(docId: string, sessionId?: string): Promise<Recommendation[]> {
    const query = sessionId ? `?session_id=${sessionId}` : "";
    return this.request(`/documents/${docId}/recommendations${query}`);
  }

  // -- sessions and synthesis ------------------------------------------------------

  createSession(docId: string, conditionLabel?: string): Promise<SessionInfo> {
    return this.request(
      "/sessions",
      this.json({ doc_id: docId, condition_label: conditionLabel ?? null }),
    );
  }

  logEvent(
    sessionId: string,
    kind: string,
    detail: Record<string, unknown> = {},
  ): Promise<unknown> {
    return this.request(`/sessions/${sessionId}/events`, this.json({ kind, detail }));
  }

  summarize(sessionId: string): AsyncGenerator<Frame> {
    return this.stream(`/sessions/${sessionId}/outline`, { method: "POST" });
  }

  expand(sessionId: string, draftId: string): AsyncGenerator<Frame> {
    return this.stream(`/sessions/${sessionId}/drafts/${draftId}/expand`, {
      method: "POST",
    });
  }

  trace(draftId: string, itemId: string, sessionId?: string): Promise<TraceResult> {
    const query = sessionId ? `?session_id=${sessionId}` : "";
    return this.request(`/drafts/${draftId}/items/${itemId}/trace${query}`);
  }

  reflection(
    draftId: string,
    finalText: string,
  ): Promise<{ draft_id: string; items: Record<string, boolean> }> {
    return this.request(
      `/drafts/${draftId}/reflection`,
      this.json({ final_text: finalText }),
    );
  }

  submit(
    sessionId: string,
    finalReviewText: string,
    checklist: Record<string, boolean>,
  ): Promise<SessionInfo> {
    return this.request(
      `/sessions/${sessionId}/submit`,
      this.json({ final_review_text: finalReviewText, checklist }),
    );
  }

  getDraft(draftId: string): Promise<OutlineDraft> {
    return this.request(`/drafts/${draftId}`);
  }
}
