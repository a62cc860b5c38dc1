/** Popups: citation card, phrase-cue picker, recommendations, reflection gate. */

import { clear, el } from "../dom.js";
import { checklistComplete } from "../state.js";
import type { Popup } from "../state.js";
import { ASPECTS, REFLECTION_CRITERIA } from "../types.js";
import type { Aspect, Criterion } from "../types.js";

export interface PopupHandlers {
  onClose(): void;
  onAspectPicked(highlightId: string, aspect: Aspect): void;
  onAcknowledge(criterion: Criterion): void;
  onConfirmSubmit(): void;
}

export function renderPopup(
  container: HTMLElement,
  popup: Popup,
  handlers: PopupHandlers,
): void {
  clear(container);
  if (popup.kind === "none") return;
  const box = el("div", { class: `popup popup-${popup.kind}` });
  box.append(
    el("button", { class: "popup-close", text: "x", onclick: () => handlers.onClose() }),
  );

  if (popup.kind === "citation_card") {
    const card = popup.card;
    box.append(el("h3", { class: "card-title", text: card.title }));
    if (card.publication_date) {
      box.append(el("div", { class: "card-date", text: card.publication_date }));
    }
    if (card.doi_link) {
      box.append(
        el("a", { class: "card-doi", href: card.doi_link, text: card.doi_link }),
      );
    }
    box.append(el("p", { class: "card-tldr", text: card.tldr || "(no summary)" }));
  } else if (popup.kind === "phrase_cue") {
    box.append(el("h3", { text: "Get a Question" }));
    const picker = el("div", { class: "aspect-picker" });
    for (const aspect of ASPECTS) {
      picker.append(
        el("button", {
          class: `aspect${popup.aspect === aspect ? " picked" : ""}`,
          text: aspect,
          onclick: () => handlers.onAspectPicked(popup.highlightId, aspect),
        }),
      );
    }
    box.append(picker);
    if (popup.streaming) {
      box.append(el("div", { class: "busy-indicator", text: "thinking..." }));
    }
    if (popup.question) {
      box.append(el("p", { class: "phrase-question", text: popup.question }));
    }
  } else if (popup.kind === "recommendations") {
    box.append(el("h3", { text: "Possibly missing citations" }));
    const list = el("ul", { class: "recommendation-list" });
    for (const rec of popup.items) {
      list.append(
        el(
          "li",
          { class: "recommendation" },
          el("span", { class: "rec-title", text: rec.title }),
          el("span", {
            class: "rec-venue",
            text: [rec.venue, rec.year].filter(Boolean).join(", "),
          }),
        ),
      );
    }
    box.append(list);
  } else {
    // reflection: all five criteria must be acknowledged before submitting
    box.append(el("h3", { text: "Before you submit" }));
    const list = el("div", { class: "reflection-list" });
    for (const criterion of REFLECTION_CRITERIA) {
      const checkbox = el("input", {
        type: "checkbox",
        id: `criterion-${criterion}`,
        onchange: () => handlers.onAcknowledge(criterion),
      }) as HTMLInputElement;
      checkbox.checked = popup.checklist[criterion];
      list.append(
        el(
          "label",
          { class: "criterion", for: `criterion-${criterion}` },
          checkbox,
          el("span", { text: criterion }),
        ),
      );
    }
    box.append(list);
    box.append(
      el("button", {
        class: "confirm-submit",
        text: "Submit",
        disabled: !checklistComplete(popup.checklist),
        onclick: () => handlers.onConfirmSubmit(),
      }),
    );
  }
  container.append(box);
}
