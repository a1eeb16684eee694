// The three screens, rendered straight into a root element. All state
// lives in local variables: closing the tab or reloading forgets
// everything, including lab credentials.

import { ApiClient, ApiError, Booking, LabCredentials, Slot } from "./api.js";
import { checkCode, renderCode } from "./codes.js";
import { text } from "./text.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function errorMessage(err: unknown): string {
  if (err instanceof ApiError) return text.errors[err.kind];
  return text.errors.bad_request;
}

function notice(kind: "error" | "ok", message: string): HTMLElement {
  return el("p", { class: `notice ${kind}`, role: "status" }, [message]);
}

function copyButton(value: string): HTMLElement {
  const button = el("button", { type: "button", class: "copy" }, [text.copyButton]);
  button.addEventListener("click", async () => {
    try {
      await navigator.clipboard?.writeText(value);
      button.textContent = text.copiedNote;
    } catch {
      button.textContent = value; // clipboard unavailable: show to hand-copy
    }
  });
  return button;
}

function slotLabel(slot: Slot): string {
  const start = new Date(slot.window_start);
  const end = new Date(slot.window_end);
  return `${slot.location_label}, ${slot.address} — ${start.toLocaleString()} to ${end.toLocaleTimeString()}`;
}

// Serializes the submits of one form: while a request is in flight the
// trigger stays disabled, so each user action yields at most one call.
function guard(button: HTMLButtonElement, action: () => Promise<void>): () => void {
  return () => {
    if (button.disabled) return;
    button.disabled = true;
    action().finally(() => {
      button.disabled = false;
    });
  };
}

export function redeemView(root: HTMLElement, api: ApiClient): void {
  const input = el("input", {
    id: "voucher-code",
    placeholder: text.codePlaceholder,
    autocomplete: "off",
    spellcheck: "false",
  });
  const feedback = el("div", { id: "redeem-feedback" });
  const slotsBox = el("div", { id: "slots" });
  const findButton = el("button", { type: "button", id: "find-slots" }, [
    text.checkCodeButton,
  ]);

  const showBooking = (booking: Booking) => {
    root.replaceChildren(
      el("h2", {}, [text.confirmationHeading]),
      el("p", { class: "code", id: "confirmation-code" }, [booking.confirmation_code]),
      copyButton(booking.confirmation_code),
      el("p", { id: "booking-where" }, [
        `${booking.location_label}, ${booking.address}`,
      ]),
      el("p", { id: "booking-when" }, [
        `${new Date(booking.window_start).toLocaleString()} to ${new Date(
          booking.window_end,
        ).toLocaleTimeString()}`,
      ]),
      notice("ok", text.confirmationKeep),
    );
  };

  const listSlots = async () => {
    feedback.replaceChildren();
    slotsBox.replaceChildren();
    const checked = checkCode(input.value, "voucher");
    if (!checked.ok) {
      const message =
        checked.reason === "checksum"
          ? text.codeTypo
          : checked.reason === "namespace"
            ? text.voucherNamespace
            : text.codeMalformed;
      feedback.replaceChildren(notice("error", message));
      return;
    }
    try {
      const { slots } = await api.listSlots();
      if (!slots.length) {
        slotsBox.replaceChildren(notice("error", text.noSlots));
        return;
      }
      for (const slot of slots) {
        const bookButton = el("button", { type: "button", class: "book" }, [
          text.bookButton,
        ]);
        bookButton.addEventListener(
          "click",
          guard(bookButton, async () => {
            try {
              showBooking(await api.redeemAndBook(checked.code, slot.slot_id));
            } catch (err) {
              feedback.replaceChildren(notice("error", errorMessage(err)));
            }
          }),
        );
        slotsBox.append(
          el("div", { class: "slot" }, [el("span", {}, [slotLabel(slot)]), bookButton]),
        );
      }
    } catch (err) {
      feedback.replaceChildren(notice("error", errorMessage(err)));
    }
  };

  findButton.addEventListener("click", guard(findButton, listSlots));
  root.replaceChildren(
    el("h2", {}, [text.redeemHeading]),
    el("p", {}, [text.redeemIntro]),
    input,
    findButton,
    feedback,
    slotsBox,
  );
}

export function resultsView(root: HTMLElement, api: ApiClient): void {
  const input = el("input", {
    id: "confirmation-input",
    placeholder: text.codePlaceholder,
    autocomplete: "off",
    spellcheck: "false",
  });
  const outcome = el("div", { id: "outcome" });
  const lookupButton = el("button", { type: "button", id: "lookup" }, [text.lookupButton]);

  const lookup = async () => {
    outcome.replaceChildren();
    const checked = checkCode(input.value, "confirmation");
    if (!checked.ok) {
      const message =
        checked.reason === "checksum"
          ? text.codeTypo
          : checked.reason === "namespace"
            ? text.confirmationNamespace
            : text.codeMalformed;
      outcome.replaceChildren(notice("error", message));
      return;
    }
    try {
      const found = await api.lookupResult(checked.code);
      if (found.status === "pending") {
        outcome.replaceChildren(el("p", { id: "result-pending" }, [text.pendingText]));
      } else if (found.result === "negative") {
        outcome.replaceChildren(el("p", { id: "result-negative" }, [text.negativeText]));
      } else if (found.result === "inconclusive") {
        outcome.replaceChildren(
          el("p", { id: "result-inconclusive" }, [text.inconclusiveText]),
        );
      } else {
        outcome.replaceChildren(
          el("p", { id: "result-positive" }, [text.positiveText]),
          el("p", {}, [text.chainIntro(found.chain_cap)]),
          el("p", { class: "code", id: "chain-code" }, [renderCode(found.chain_voucher)]),
          copyButton(renderCode(found.chain_voucher)),
        );
      }
    } catch (err) {
      outcome.replaceChildren(notice("error", errorMessage(err)));
    }
  };

  lookupButton.addEventListener("click", guard(lookupButton, lookup));
  root.replaceChildren(
    el("h2", {}, [text.resultsHeading]),
    el("p", {}, [text.resultsIntro]),
    input,
    lookupButton,
    outcome,
  );
}

export function labView(root: HTMLElement, api: ApiClient): void {
  // Held here and nowhere else; navigating away drops them.
  let credentials: LabCredentials | null = null;

  const labId = el("input", { id: "lab-id", autocomplete: "off" });
  const secret = el("input", { id: "lab-secret", type: "password", autocomplete: "off" });
  const confirmation = el("input", { id: "lab-confirmation", autocomplete: "off" });
  const resultSelect = el("select", { id: "lab-result" });
  for (const value of ["negative", "positive", "inconclusive"]) {
    resultSelect.append(el("option", { value }, [value]));
  }
  const feedback = el("div", { id: "lab-feedback" });

  const requireCredentials = (): LabCredentials | null => {
    if (!credentials) {
      credentials = { labId: labId.value.trim(), secret: secret.value };
    }
    return credentials.labId ? credentials : null;
  };

  const handleAuthFailure = () => {
    credentials = null;
    secret.value = "";
    feedback.replaceChildren(notice("error", text.authFailed));
  };

  const act = async (
    run: (auth: LabCredentials, code: string) => Promise<{ status: string }>,
    okText: string,
  ) => {
    feedback.replaceChildren();
    const checked = checkCode(confirmation.value, "confirmation");
    if (!checked.ok) {
      feedback.replaceChildren(notice("error", text.codeMalformed));
      return;
    }
    const auth = requireCredentials();
    if (!auth) {
      feedback.replaceChildren(notice("error", text.authFailed));
      return;
    }
    try {
      await run(auth, checked.code);
      feedback.replaceChildren(notice("ok", okText));
    } catch (err) {
      if (err instanceof ApiError && err.kind === "unauthorized") {
        handleAuthFailure();
        return;
      }
      feedback.replaceChildren(notice("error", errorMessage(err)));
    }
  };

  const performedButton = el("button", { type: "button", id: "mark-performed" }, [
    text.performedButton,
  ]);
  performedButton.addEventListener(
    "click",
    guard(performedButton, () =>
      act((auth, code) => api.markPerformed(code, auth), text.performedOk),
    ),
  );

  const resultButton = el("button", { type: "button", id: "post-result" }, [
    text.postResultButton,
  ]);
  resultButton.addEventListener(
    "click",
    guard(resultButton, () =>
      act(
        (auth, code) =>
          api.postResult(
            code,
            resultSelect.value as "negative" | "positive" | "inconclusive",
            auth,
          ),
        text.resultOk,
      ),
    ),
  );

  root.replaceChildren(
    el("h2", {}, [text.labHeading]),
    el("p", {}, [text.labIntro]),
    el("label", { for: "lab-id" }, [text.labIdLabel]),
    labId,
    el("label", { for: "lab-secret" }, [text.labSecretLabel]),
    secret,
    el("label", { for: "lab-confirmation" }, [text.confirmationLabel]),
    confirmation,
    performedButton,
    el("label", { for: "lab-result" }, [text.resultLabel]),
    resultSelect,
    resultButton,
    feedback,
  );
}
