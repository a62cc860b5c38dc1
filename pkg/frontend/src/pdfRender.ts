/** Page raster rendering, behind an interface so tests stay canvas-free. */

import { DEFAULT_PAGE_SIZE } from "./geometry.js";

export interface PageRenderer {
  pageCount(): Promise<number>;
  /** Paint page content into the given container (already sized). */
  renderPage(page: number, container: HTMLElement, zoom: number): Promise<void>;
  pageSize(page: number): { width: number; height: number };
}

/** Geometry-only renderer: blank page boxes; overlays still position exactly. */
export class BoxRenderer implements PageRenderer {
  constructor(private pages: number) {}

  pageCount(): Promise<number> {
    return Promise.resolve(this.pages);
  }

  renderPage(): Promise<void> {
    return Promise.resolve();
  }

  pageSize(): { width: number; height: number } {
    return DEFAULT_PAGE_SIZE;
  }
}

type PdfJsDocument = {
  numPages: number;
  getPage(n: number): Promise<{
    getViewport(opts: { scale: number }): { width: number; height: number };
    render(opts: { canvasContext: unknown; viewport: unknown }): {
      promise: Promise<void>;
    };
  }>;
};

/** Renders the original uploaded PDF with pdf.js. */
export class PdfJsRenderer implements PageRenderer {
  private constructor(
    private doc: PdfJsDocument,
    private sizes: Map<number, { width: number; height: number }>,
  ) {}

  static async load(url: string): Promise<PdfJsRenderer> {
    // "pdfjs-dist" resolves through the import map in index.html when served
    // without a bundler; the worker path is relative to the host page.
    const pdfjs = await import("pdfjs-dist");
    pdfjs.GlobalWorkerOptions.workerSrc = new URL(
      "node_modules/pdfjs-dist/build/pdf.worker.mjs",
      document.baseURI,
    ).toString();
    const doc = (await pdfjs.getDocument(url).promise) as unknown as PdfJsDocument;
    const sizes = new Map<number, { width: number; height: number }>();
    for (let n = 1; n <= doc.numPages; n += 1) {
      const page = await doc.getPage(n);
      const viewport = page.getViewport({ scale: 1 });
      sizes.set(n, { width: viewport.width, height: viewport.height });
    }
    return new PdfJsRenderer(doc, sizes);
  }

  pageCount(): Promise<number> {
    return Promise.resolve(this.doc.numPages);
  }

  async renderPage(page: number, container: HTMLElement, zoom: number): Promise<void> {
    const pdfPage = await this.doc.getPage(page);
    const viewport = pdfPage.getViewport({ scale: zoom });
    const canvas = document.createElement("canvas");
    canvas.width = viewport.width;
    canvas.height = viewport.height;
    canvas.className = "page-canvas";
    container.prepend(canvas);
    await pdfPage.render({
      canvasContext: canvas.getContext("2d"),
      viewport,
    }).promise;
  }

  pageSize(page: number): { width: number; height: number } {
    return this.sizes.get(page) ?? DEFAULT_PAGE_SIZE;
  }
}
