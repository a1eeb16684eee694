// Client-side mirror of the server's code format, so a typo is caught
// before any request leaves the browser. The server stays authoritative.

export const ALPHABET = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

const VOUCHER_FIRST = "ABCDEFGHJKMNPQRSTVWXYZ";
const CONFIRMATION_FIRST = "0123456789";

const CODE_LENGTH = 10; // 9 payload characters + 1 checksum character

const GLYPH_MAP: Record<string, string> = { O: "0", I: "1", L: "1" };

export type Namespace = "voucher" | "confirmation";

export function normalize(raw: string): string {
  const folded = raw.toUpperCase().replace(/[\s\-_.]/g, "");
  let out = "";
  for (const ch of folded) {
    out += GLYPH_MAP[ch] ?? ch;
  }
  return out;
}

function checksumChar(payload: string): string {
  let total = 0;
  for (let i = 0; i < payload.length; i++) {
    total += (2 * i + 1) * ALPHABET.indexOf(payload[i]);
  }
  return ALPHABET[total % ALPHABET.length];
}

export type CodeCheck =
  | { ok: true; code: string }
  | { ok: false; reason: "malformed" | "namespace" | "checksum" };

export function checkCode(raw: string, namespace: Namespace): CodeCheck {
  const code = normalize(raw);
  if (code.length !== CODE_LENGTH) {
    return { ok: false, reason: "malformed" };
  }
  for (const ch of code) {
    if (!ALPHABET.includes(ch)) {
      return { ok: false, reason: "malformed" };
    }
  }
  const first = namespace === "voucher" ? VOUCHER_FIRST : CONFIRMATION_FIRST;
  if (!first.includes(code[0])) {
    return { ok: false, reason: "namespace" };
  }
  if (checksumChar(code.slice(0, -1)) !== code[code.length - 1]) {
    return { ok: false, reason: "checksum" };
  }
  return { ok: true, code };
}

export function renderCode(code: string): string {
  return code.length === CODE_LENGTH ? `${code.slice(0, 5)}-${code.slice(5)}` : code;
}
