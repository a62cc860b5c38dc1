/** Browser bootstrap: wire the workspace to the page and the text selection. */

import { ApiClient } from "./api.js";
import { BoxRenderer, PdfJsRenderer } from "./pdfRender.js";
import { Workspace } from "./workspace.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const docId = params.get("doc");
  if (!docId) {
    document.body.textContent = "Pass ?doc=<doc_id> (and optional &session=...)";
    return;
  }
  const api = new ApiClient(params.get("api") ?? "");
  let renderer;
  try {
    renderer = await PdfJsRenderer.load(api.pdfUrl(docId));
  } catch {
    renderer = new BoxRenderer(8);
  }
  const root = document.getElementById("workspace") ?? document.body;
  const workspace = new Workspace(root, api, { zoom: 1.25, renderer });
  await workspace.load(docId, params.get("session") ?? undefined);

  // Text selection on the PDF pane feeds the highlight/note toolbar.
  document.addEventListener("selectionchange", () => {
    const selection = window.getSelection();
    if (!selection || selection.isCollapsed) {
      workspace.setSelection(null);
      return;
    }
    const text = selection.toString();
    const range = selection.getRangeAt(0);
    const pageNode = (range.startContainer.parentElement ?? undefined)?.closest(
      ".page",
    ) as HTMLElement | null;
    if (!pageNode) {
      workspace.setSelection(null);
      return;
    }
    const page = Number(pageNode.dataset.page ?? "1");
    const pageBox = pageNode.getBoundingClientRect();
    const rects = Array.from(range.getClientRects()).map((box) => ({
      page,
      x0: (box.left - pageBox.left) / workspace.zoom,
      y0: (box.top - pageBox.top) / workspace.zoom,
      x1: (box.right - pageBox.left) / workspace.zoom,
      y1: (box.bottom - pageBox.top) / workspace.zoom,
    }));
    workspace.setSelection(text.trim() ? { text, rects } : null);
  });
}

void boot();
