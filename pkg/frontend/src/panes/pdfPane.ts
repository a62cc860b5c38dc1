/** Left column: pages with highlight, citation, traced-rect, and cue layers. */

import { clear, el, px } from "../dom.js";
import { rectToPixels, unionBox } from "../geometry.js";
import type { PageRenderer } from "../pdfRender.js";
import type { ViewState } from "../state.js";
import type { PageRect } from "../types.js";

export interface PdfPaneHandlers {
  onCitationClick(refId: string): void;
  onCueChipToggle(sectionIndex: number): void;
  onCueAnswer(cueId: string, answer: string): void;
}

function maxPage(state: ViewState): number {
  let page = 1;
  const doc = state.doc;
  if (!doc) return page;
  for (const section of doc.sections) {
    for (const span of section.spans) {
      for (const rect of span.rects) page = Math.max(page, rect.page);
    }
  }
  for (const pair of state.annotations) {
    for (const rect of pair.highlight.rects) page = Math.max(page, rect.page);
  }
  return page;
}

function overlay(
  rect: PageRect,
  zoom: number,
  className: string,
  title?: string,
): HTMLElement {
  const box = rectToPixels(rect, zoom);
  const node = el("div", { class: className });
  node.style.position = "absolute";
  node.style.left = px(box.left);
  node.style.top = px(box.top);
  node.style.width = px(box.width);
  node.style.height = px(box.height);
  if (title) node.title = title;
  return node;
}

export function renderPdfPane(
  container: HTMLElement,
  state: ViewState,
  zoom: number,
  renderer: PageRenderer,
  handlers: PdfPaneHandlers,
): void {
  clear(container);
  const doc = state.doc;
  if (!doc) return;
  const pages = maxPage(state);
  const pageNodes = new Map<number, HTMLElement>();

  for (let page = 1; page <= pages; page += 1) {
    const size = renderer.pageSize(page);
    const node = el("div", { class: "page", "data-page": String(page) });
    node.style.position = "relative";
    node.style.width = px(size.width * zoom);
    node.style.height = px(size.height * zoom);
    node.style.top = "0";
    container.append(node);
    pageNodes.set(page, node);
    void renderer.renderPage(page, node, zoom);
  }

  // reviewer highlights
  for (const pair of state.annotations) {
    for (const rect of pair.highlight.rects) {
      const node = overlay(rect, zoom, "note-highlight");
      node.dataset.highlightId = pair.highlight.highlight_id;
      if (pair.highlight.highlight_id === state.selectedHighlight) {
        node.classList.add("selected");
      }
      pageNodes.get(rect.page)?.append(node);
    }
  }

  // rects lit up by the last outline-bullet trace
  for (const rect of state.tracedRects) {
    pageNodes.get(rect.page)?.append(overlay(rect, zoom, "trace-highlight"));
  }

  // clickable citation layer
  for (const citation of doc.inline_citations) {
    for (const rect of citation.span.rects) {
      const node = overlay(rect, zoom, "citation-overlay", citation.span.text);
      if (citation.target !== null) {
        const refId = citation.target;
        node.addEventListener("click", () => handlers.onCitationClick(refId));
        node.classList.add("linked");
      }
      pageNodes.get(rect.page)?.append(node);
    }
  }

  // section cue chips, anchored beside each section's first span
  for (const section of doc.sections) {
    const anchor = section.spans[0]?.rects[0];
    if (!anchor) continue;
    const pageNode = pageNodes.get(anchor.page);
    if (!pageNode) continue;
    const chip = el("button", {
      class: "cue-chip",
      "data-section": String(section.index),
      onclick: () => handlers.onCueChipToggle(section.index),
      text: "?",
    });
    chip.style.position = "absolute";
    chip.style.left = px(rectToPixels(anchor, zoom).left - 28);
    chip.style.top = px(rectToPixels(anchor, zoom).top);
    pageNode.append(chip);

    if (state.visibleSectionCues[section.index]) {
      const cues = state.sectionCues[section.index] ?? [];
      const list = el(
        "div",
        { class: "cue-list", "data-section": String(section.index) },
        ...cues.map((cue) =>
          el(
            "div",
            { class: "cue" },
            el("span", { class: "cue-aspect", text: cue.aspect }),
            el("span", { class: "cue-question", text: cue.question }),
            el("input", {
              class: "cue-answer",
              placeholder: "your reflection",
              onchange: (event) =>
                handlers.onCueAnswer(
                  cue.cue_id,
                  (event.target as HTMLInputElement).value,
                ),
            }),
          ),
        ),
      );
      const anchorBox = unionBox(section.spans[0].rects, zoom);
      list.style.position = "absolute";
      list.style.left = px((anchorBox?.left ?? 0) + 8);
      list.style.top = px((anchorBox?.top ?? 0) + (anchorBox?.height ?? 0));
      pageNode.append(list);
    }
  }
}
