/** Newline-delimited JSON frame reading for the streaming endpoints. */

import type { Frame } from "./types.js";

/** Stateful line splitter: feed text chunks, get completed frames. */
export class FrameSplitter {
  private buffer = "";

  push(chunk: string): Frame[] {
    this.buffer += chunk;
    const frames: Frame[] = [];
    let newline = this.buffer.indexOf("\n");
    while (newline >= 0) {
      const line = this.buffer.slice(0, newline).trim();
      this.buffer = this.buffer.slice(newline + 1);
      if (line) frames.push(JSON.parse(line) as Frame);
      newline = this.buffer.indexOf("\n");
    }
    return frames;
  }

  /** Flush a trailing unterminated line (servers normally end with \n). */
  finish(): Frame[] {
    const line = this.buffer.trim();
    this.buffer = "";
    return line ? [JSON.parse(line) as Frame] : [];
  }
}

export async function* readFrames(
  body: ReadableStream<Uint8Array>,
): AsyncGenerator<Frame> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  const splitter = new FrameSplitter();
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    for (const frame of splitter.push(decoder.decode(value, { stream: true }))) {
      yield frame;
    }
  }
  for (const frame of splitter.push(decoder.decode())) yield frame;
  for (const frame of splitter.finish()) yield frame;
}
