/** Workspace integration in jsdom with a stubbed API: the UI release checks. */

import { beforeEach, describe, expect, it } from "vitest";

import { Workspace } from "../src/workspace.js";
import { rectToPixels } from "../src/geometry.js";
import { BoxRenderer } from "../src/pdfRender.js";
import { REFLECTION_CRITERIA } from "../src/types.js";
import {
  DOC,
  DRAFT,
  TRACE_W1,
  TRACE_W2,
  annotationPair,
  stubApi,
  seedAnnotations,
} from "./fixtures.js";

const ZOOM = 2.0;

function mount(api = stubApi()) {
  document.body.innerHTML = '<main id="root"></main>';
  const root = document.getElementById("root")!;
  const workspace = new Workspace(root, api, {
    zoom: ZOOM,
    renderer: new BoxRenderer(2),
  });
  return { root, workspace };
}

function tick(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

describe("layout", () => {
  it("mounts three columns and a popup layer", async () => {
    const { root, workspace } = mount();
    await workspace.load(DOC.doc_id);
    expect(root.querySelector(".pdf-pane")).toBeTruthy();
    expect(root.querySelector(".notes-pane")).toBeTruthy();
    expect(root.querySelector(".draft-pane")).toBeTruthy();
    expect(root.querySelector(".popup-layer")).toBeTruthy();
  });
});

describe("overlay geometry", () => {
  it("positions citation overlays exactly at rect times zoom", async () => {
    const { root, workspace } = mount();
    await workspace.load(DOC.doc_id);
    const overlay = root.querySelector<HTMLElement>(".citation-overlay");
    expect(overlay).toBeTruthy();
    const sourceRect = DOC.inline_citations[0].span.rects[0];
    const box = rectToPixels(sourceRect, ZOOM);
    expect(overlay!.style.left).toBe(`${box.left}px`);
    expect(overlay!.style.top).toBe(`${box.top}px`);
    expect(overlay!.style.width).toBe(`${box.width}px`);
    expect(overlay!.style.height).toBe(`${box.height}px`);
  });

  it("positions note highlights from their PageRects", async () => {
    const api = seedAnnotations(stubApi(), [annotationPair(1, "note", "weakness")]);
    const { root, workspace } = mount(api);
    await workspace.load(DOC.doc_id);
    const highlight = root.querySelector<HTMLElement>(".note-highlight");
    const box = rectToPixels({ page: 1, x0: 50, y0: 420, x1: 280, y1: 432 }, ZOOM);
    expect(highlight!.style.left).toBe(`${box.left}px`);
    expect(highlight!.style.width).toBe(`${box.width}px`);
  });
});

describe("citation card popup", () => {
  it("opens with title, date, DOI link, and tldr on citation click", async () => {
    const { root, workspace } = mount();
    await workspace.load(DOC.doc_id);
    root.querySelector<HTMLElement>(".citation-overlay.linked")!.click();
    await tick();
    const popup = root.querySelector(".popup-citation_card")!;
    expect(popup.querySelector(".card-title")!.textContent).toBe(
      "Studying Together While Apart",
    );
    expect(popup.querySelector(".card-date")!.textContent).toBe("2021-06-03");
    expect(popup.querySelector(".card-doi")!.getAttribute("href")).toBe(
      "https://doi.org/10.1145/3449100",
    );
    expect(popup.querySelector(".card-tldr")!.textContent).toContain(
      "choreograph camera use",
    );
  });

  it("clicking a rect-less area opens nothing", async () => {
    const { root, workspace } = mount();
    await workspace.load(DOC.doc_id);
    root.querySelector<HTMLElement>(".page")!.click();
    await tick();
    expect(root.querySelector(".popup")).toBeNull();
  });
});

describe("summarize button threshold", () => {
  it("is hidden at one note and visible at two", async () => {
    const one = seedAnnotations(stubApi(), [annotationPair(1, "a", "other")]);
    const first = mount(one);
    await first.workspace.load(DOC.doc_id);
    expect(first.root.querySelector(".summarize-button")).toBeNull();

    const two = seedAnnotations(stubApi(), [
      annotationPair(1, "a", "other"),
      annotationPair(2, "b", "weakness"),
    ]);
    const second = mount(two);
    await second.workspace.load(DOC.doc_id);
    expect(second.root.querySelector(".summarize-button")).toBeTruthy();
  });
});

describe("outline flow", () => {
  async function summarized() {
    const api = seedAnnotations(stubApi(), [
      annotationPair(1, "timely topic", "strength"),
      annotationPair(2, "only four teams studied", "weakness"),
      annotationPair(3, "recruitment details sparse", "weakness"),
    ]);
    const ctx = mount(api);
    await ctx.workspace.load(DOC.doc_id);
    ctx.root.querySelector<HTMLElement>(".summarize-button")!.click();
    await tick();
    return ctx;
  }

  it("streams the outline into the editable draft panel", async () => {
    const { root } = await summarized();
    const textarea = root.querySelector<HTMLTextAreaElement>(".draft-text")!;
    expect(textarea.value).toContain("Summary:");
    expect(textarea.disabled).toBe(false);
    expect(root.querySelectorAll(".outline-bullet")).toHaveLength(3);
  });

  it("bullet click highlights exactly the trace rects and scrolls the PDF", async () => {
    const { root, workspace } = await summarized();
    const bullets = root.querySelectorAll<HTMLElement>(".outline-bullet");
    bullets[1].click(); // "Limited scope of the study sample" -> TRACE_W1
    await tick();
    let traced = [...root.querySelectorAll<HTMLElement>(".trace-highlight")];
    expect(traced).toHaveLength(TRACE_W1.rects.length);
    const boxes = traced.map((node) => node.style.left + "/" + node.style.top);
    const expected = TRACE_W1.rects.map((r) => {
      const b = rectToPixels(r, ZOOM);
      return `${b.left}px/${b.top}px`;
    });
    expect(boxes.sort()).toEqual(expected.sort());
    expect(workspace.state.tracedNoteIds).toEqual(["n-2"]);

    // selecting another bullet replaces the highlights; nothing stale remains
    bullets[2].click();
    await tick();
    traced = [...root.querySelectorAll<HTMLElement>(".trace-highlight")];
    expect(traced).toHaveLength(TRACE_W2.rects.length);
    const second = rectToPixels(TRACE_W2.rects[0], ZOOM);
    expect(traced[0].style.left).toBe(`${second.left}px`);
    expect(workspace.state.tracedNoteIds).toEqual(["n-3"]);
  });

  it("flashes the source note in the middle panel", async () => {
    const { root } = await summarized();
    root.querySelectorAll<HTMLElement>(".outline-bullet")[1].click();
    await tick();
    const flashed = root.querySelector<HTMLElement>(".note-entry.flash");
    expect(flashed).toBeTruthy();
    expect(flashed!.dataset.noteId).toBe("n-2");
  });

  it("expand appends details and hides the expand button afterwards", async () => {
    const expandedDraft = {
      ...DRAFT,
      expanded: true,
      strength_items: [
        { ...DRAFT.strength_items[0], detail: "A sufficiently long detail sentence." },
      ],
    };
    const api = seedAnnotations(
      stubApi({
        expand: (() =>
          (async function* () {
            yield { kind: "done" as const, result: expandedDraft };
          })()) as ReturnType<typeof stubApi>["expand"],
      }),
      [annotationPair(1, "a", "strength"), annotationPair(2, "b", "weakness")],
    );
    const { root, workspace } = mount(api);
    await workspace.load(DOC.doc_id);
    root.querySelector<HTMLElement>(".summarize-button")!.click();
    await tick();
    root.querySelector<HTMLElement>(".expand-button")!.click();
    await tick();
    expect(root.querySelector(".expand-button")).toBeNull();
    expect(root.querySelector(".outline-bullet .detail")!.textContent).toContain(
      "sufficiently long detail",
    );
  });
});

describe("reflection gate", () => {
  it("lists the five criteria and blocks submit until all acknowledged", async () => {
    let submitted = false;
    const api = seedAnnotations(
      stubApi({
        submit: async (sessionId) => {
          submitted = true;
          return {
            session_id: sessionId,
            doc_id: DOC.doc_id,
            condition_label: null,
            started_at: "",
            submitted_at: "now",
            final_review_text: "t",
            checklist: null,
            latest_draft_id: null,
          };
        },
      }),
      [annotationPair(1, "a", "strength"), annotationPair(2, "b", "weakness")],
    );
    const { root, workspace } = mount(api);
    await workspace.load(DOC.doc_id);
    root.querySelector<HTMLElement>(".summarize-button")!.click();
    await tick();
    root.querySelector<HTMLElement>(".submit-button")!.click();
    await tick();

    const labels = [...root.querySelectorAll(".criterion span")].map(
      (node) => node.textContent,
    );
    expect(labels).toEqual([...REFLECTION_CRITERIA]);

    const confirm = () => root.querySelector<HTMLButtonElement>(".confirm-submit")!;
    expect(confirm().disabled).toBe(true);

    const boxes = () => [...root.querySelectorAll<HTMLInputElement>(".criterion input")];
    // each acknowledgment re-renders the modal, so re-query per click
    for (let i = 0; i < 4; i += 1) {
      boxes()[i].click();
      await tick();
    }
    expect(confirm().disabled).toBe(true);
    confirm().click();
    await tick();
    expect(submitted).toBe(false); // four of five acknowledged: still blocked

    boxes()[4].click();
    await tick();
    expect(confirm().disabled).toBe(false);
    confirm().click();
    await tick();
    expect(submitted).toBe(true);
    expect(workspace.state.submitted).toBe(true);
  });
});

describe("streaming failures", () => {
  it("shows a retry affordance and clears the buffer on provider errors", async () => {
    const api = seedAnnotations(
      stubApi({
        summarize: (() =>
          (async function* () {
            yield {
              kind: "partial" as const,
              field: "summary",
              index: 0,
              value: "Half",
            };
            yield {
              kind: "error" as const,
              code: "ProviderError",
              message: "unreachable",
            };
          })()) as ReturnType<typeof stubApi>["summarize"],
      }),
      [annotationPair(1, "a", "strength"), annotationPair(2, "b", "weakness")],
    );
    const { root, workspace } = mount(api);
    await workspace.load(DOC.doc_id);
    root.querySelector<HTMLElement>(".summarize-button")!.click();
    await tick();
    expect(workspace.state.streamingDraftBuffer).toBe("");
    expect(root.querySelector(".error-banner")).toBeTruthy();
    expect(root.querySelector(".error-banner .retry")).toBeTruthy();
  });
});

describe("phrase cue flow", () => {
  it("streams a question into the popup after aspect pick", async () => {
    const { root, workspace } = mount();
    await workspace.load(DOC.doc_id);
    workspace.setSelection({
      text: "four virtual studying teams",
      rects: [{ page: 1, x0: 50, y0: 420, x1: 280, y1: 432 }],
    });
    expect(workspace.selectionEnabled).toBe(true);
    await workspace.requestPhraseCue();
    await tick();
    const popup = root.querySelector(".popup-phrase_cue")!;
    expect(popup.querySelectorAll(".aspect")).toHaveLength(4);
    popup.querySelectorAll<HTMLElement>(".aspect")[3].click(); // clarity
    await tick();
    expect(
      root.querySelector(".popup-phrase_cue .phrase-question")!.textContent,
    ).toContain("clarity");
  });

  it("whitespace selection disables the toolbar", async () => {
    const { workspace } = mount();
    await workspace.load(DOC.doc_id);
    workspace.setSelection({ text: "   ", rects: [] });
    expect(workspace.selectionEnabled).toBe(false);
  });
});
