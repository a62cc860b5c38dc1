/** Right column: the editable draft, summarize/expand controls, outline bullets. */

import { clear, el } from "../dom.js";
import { summarizeVisible } from "../state.js";
import type { ViewState } from "../state.js";

export interface DraftPaneHandlers {
  onSummarize(): void;
  onExpand(): void;
  onBulletClick(itemId: string): void;
  onDraftEdited(text: string): void;
  onDraftFocus(): void;
  onDraftBlur(): void;
  onSubmitRequested(): void;
  onRetry(): void;
}

export function renderDraftPane(
  container: HTMLElement,
  state: ViewState,
  handlers: DraftPaneHandlers,
): void {
  clear(container);
  container.append(el("h2", { text: "Review draft" }));

  // Editable at all times, streaming included.
  const textarea = el("textarea", {
    class: "draft-text",
    onfocus: () => handlers.onDraftFocus(),
    onblur: () => handlers.onDraftBlur(),
    oninput: (event) =>
      handlers.onDraftEdited((event.target as HTMLTextAreaElement).value),
  });
  textarea.value = state.draftText;
  container.append(textarea);

  if (state.busy) {
    container.append(
      el("div", { class: "busy-indicator", text: "synthesizing..." }),
      el("pre", { class: "stream-preview", text: state.streamingDraftBuffer }),
    );
  }
  if (state.lastError) {
    container.append(
      el(
        "div",
        { class: "error-banner" },
        el("span", { text: state.lastError }),
        el("button", { class: "retry", text: "retry", onclick: () => handlers.onRetry() }),
      ),
    );
  }

  const controls = el("div", { class: "draft-controls" });
  if (summarizeVisible(state)) {
    controls.append(
      el("button", {
        class: "summarize-button",
        text: "Summarize Notes",
        disabled: state.busy,
        onclick: () => handlers.onSummarize(),
      }),
    );
  }
  if (state.draft && !state.draft.expanded && !state.submitted) {
    controls.append(
      el("button", {
        class: "expand-button",
        text: "Expand",
        disabled: state.busy,
        onclick: () => handlers.onExpand(),
      }),
    );
  }
  if (state.draft && !state.submitted) {
    controls.append(
      el("button", {
        class: "submit-button",
        text: "Submit review",
        disabled: state.busy,
        onclick: () => handlers.onSubmitRequested(),
      }),
    );
  }
  container.append(controls);

  const draft = state.draft;
  if (!draft) return;
  const outline = el("div", { class: "outline" });
  const group = (title: string, items: typeof draft.strength_items) => {
    outline.append(el("h3", { text: title }));
    for (const item of items) {
      const bullet = el(
        "div",
        {
          class: "outline-bullet",
          "data-item-id": item.item_id,
          onclick: () => handlers.onBulletClick(item.item_id),
        },
        el("span", { class: "topic", text: item.topic }),
      );
      if (item.detail) {
        bullet.append(el("p", { class: "detail", text: item.detail }));
      }
      if (item.needs_revision) bullet.classList.add("needs-revision");
      outline.append(bullet);
    }
  };
  group("Strengths", draft.strength_items);
  group("Weaknesses", draft.weakness_items);
  container.append(outline);
}
