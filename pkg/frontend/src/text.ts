// Every user-facing string in one place. Single language, no framework.

import type { ApiErrorKind } from "./api.js";

export const text = {
  appTitle: "Anonymous testing",
  navRedeem: "Use a voucher",
  navResults: "Check a result",
  navLab: "Lab console",

  redeemHeading: "Book a test with your voucher",
  redeemIntro:
    "Enter the code you were given. No name, no phone number, no account.",
  codePlaceholder: "for example QX3M1-5TT20",
  checkCodeButton: "Find appointments",
  bookButton: "Book this slot",
  noSlots: "No open appointment slots right now. Please try again later.",

  codeTypo:
    "That code does not check out. Please compare it with what you received, character by character.",
  codeMalformed: "A code has 10 letters and digits, like QX3M1-5TT20.",
  voucherNamespace: "That looks like a confirmation code, not a testing voucher.",
  confirmationNamespace: "That looks like a testing voucher, not a confirmation code.",

  confirmationHeading: "You are booked",
  confirmationKeep:
    "Write this confirmation code down or copy it now. It is the only way to get your result, and this page will not remember it.",
  copyButton: "Copy code",
  copiedNote: "Copied.",

  resultsHeading: "Check your test result",
  resultsIntro: "Enter your confirmation code. Nothing else is needed.",
  lookupButton: "Look up result",
  pendingText: "Your result is not ready yet. Please check again later.",
  negativeText: "Your test came back negative.",
  inconclusiveText:
    "Your test was inconclusive. Please contact the testing location about a retest.",
  positiveText: "Your test came back positive.",
  chainIntro: (cap: number) =>
    `This voucher is for the people you think you might have infected. ` +
    `Share the code below with up to ${cap} of them, any way you like. ` +
    `It is not connected to you.`,

  labHeading: "Lab console",
  labIntro: "Credentials are kept in memory for this page only.",
  labIdLabel: "Lab id",
  labSecretLabel: "Secret",
  confirmationLabel: "Confirmation code",
  performedButton: "Mark test performed",
  resultLabel: "Result",
  postResultButton: "Post result",
  performedOk: "Marked as performed.",
  resultOk: "Result recorded.",
  authFailed: "Those credentials were not accepted. Please enter them again.",

  errors: {
    not_found:
      "That code is not known. It may be mistyped, expired and erased, or never issued.",
    voucher_exhausted: "This voucher has been fully used.",
    voucher_expired: "This voucher has expired.",
    slot_full:
      "That slot just filled up. Your voucher was not charged; please pick another slot.",
    wrong_state:
      "That action does not fit the booking's current state (for example posting a result before the test is marked performed).",
    unauthorized: "Not authorized.",
    rate_limited: "Too many attempts. Please wait a moment and try again.",
    bad_request: "The service rejected the request.",
    network: "Could not reach the service. Are you online?",
  } satisfies Record<ApiErrorKind, string>,
};
