/** Middle column: the reviewer's notes, flashing trace targets. */

import { clear, el } from "../dom.js";
import type { ViewState } from "../state.js";

export interface NotesPaneHandlers {
  onNoteClick(highlightId: string): void;
  onNoteDelete(noteId: string): void;
}

export function renderNotesPane(
  container: HTMLElement,
  state: ViewState,
  handlers: NotesPaneHandlers,
): void {
  clear(container);
  container.append(el("h2", { text: "Notes" }));
  const list = el("div", { class: "note-list" });
  for (const pair of state.annotations) {
    const note = pair.note;
    const flashed = note !== null && state.tracedNoteIds.includes(note.note_id);
    const entry = el(
      "div",
      {
        class: `note-entry${flashed ? " flash" : ""}`,
        onclick: () => handlers.onNoteClick(pair.highlight.highlight_id),
      },
      el("blockquote", { class: "excerpt", text: pair.highlight.extracted_text }),
    );
    if (note) {
      entry.dataset.noteId = note.note_id;
      entry.append(
        el("span", { class: `tag tag-${note.structure_tag}`, text: note.structure_tag }),
      );
      if (note.criteria_tag) {
        entry.append(el("span", { class: "tag tag-criteria", text: note.criteria_tag }));
      }
      entry.append(el("p", { class: "note-text", text: note.text || "(highlight only)" }));
      if (!state.submitted) {
        entry.append(
          el("button", {
            class: "note-delete",
            text: "delete",
            onclick: (event) => {
              event.stopPropagation();
              handlers.onNoteDelete(note.note_id);
            },
          }),
        );
      }
    }
    list.append(entry);
  }
  container.append(list);
}
