/** Zoom-aware transforms from PDF-point rectangles to pixel boxes. */

import type { PageRect } from "./types.js";

export interface PixelBox {
  left: number;
  top: number;
  width: number;
  height: number;
}

/** Default US-Letter page box in PDF points, used until real sizes load. */
export const DEFAULT_PAGE_SIZE = { width: 612, height: 792 };

/** A rect's pixel box within its page container at the given zoom. */
export function rectToPixels(rect: PageRect, zoom: number): PixelBox {
  return {
    left: rect.x0 * zoom,
    top: rect.y0 * zoom,
    width: (rect.x1 - rect.x0) * zoom,
    height: (rect.y1 - rect.y0) * zoom,
  };
}

/** Bounding box of several same-page rects, in pixels. */
export function unionBox(rects: PageRect[], zoom: number): PixelBox | null {
  if (rects.length === 0) return null;
  const x0 = Math.min(...rects.map((r) => r.x0));
  const y0 = Math.min(...rects.map((r) => r.y0));
  const x1 = Math.max(...rects.map((r) => r.x1));
  const y1 = Math.max(...rects.map((r) => r.y1));
  return rectToPixels({ page: rects[0].page, x0, y0, x1, y1 }, zoom);
}

export interface PageLayout {
  /** Pixel y-offset of each page's top edge within the scroll container. */
  pageTops: Map<number, number>;
  zoom: number;
}

export function layoutPages(
  pageCount: number,
  zoom: number,
  pageHeightPts = DEFAULT_PAGE_SIZE.height,
  gapPx = 12,
): PageLayout {
  const pageTops = new Map<number, number>();
  let y = 0;
  for (let page = 1; page <= pageCount; page += 1) {
    pageTops.set(page, y);
    y += pageHeightPts * zoom + gapPx;
  }
  return { pageTops, zoom };
}

/** Scroll offset that brings the first (page-ordered) rect into view. */
export function scrollTargetFor(
  rects: PageRect[],
  layout: PageLayout,
  padPx = 24,
): number | null {
  if (rects.length === 0) return null;
  const first = [...rects].sort(
    (a, b) => a.page - b.page || a.y0 - b.y0 || a.x0 - b.x0,
  )[0];
  const pageTop = layout.pageTops.get(first.page);
  if (pageTop === undefined) return null;
  return Math.max(0, pageTop + first.y0 * layout.zoom - padPx);
}
