// Typed client for the service's JSON API. Exactly the documented fields
// go on the wire; nothing else. A 429 is retried once after the server's
// Retry-After; every other status maps to a typed error the views can
// phrase for humans.

export type Slot = {
  slot_id: string;
  location_id: string;
  location_label: string;
  address: string;
  window_start: string;
  window_end: string;
  places_left: number;
};

export type Booking = {
  confirmation_code: string;
  slot_id: string;
  location_label: string;
  address: string;
  window_start: string;
  window_end: string;
};

export type ResultStatus =
  | { status: "pending" }
  | { status: "ready"; result: "negative" }
  | { status: "ready"; result: "inconclusive" }
  | { status: "ready"; result: "positive"; chain_voucher: string; chain_cap: number };

export type ApiErrorKind =
  | "not_found"
  | "voucher_exhausted"
  | "voucher_expired"
  | "slot_full"
  | "wrong_state"
  | "unauthorized"
  | "rate_limited"
  | "bad_request"
  | "network";

export class ApiError extends Error {
  constructor(
    readonly kind: ApiErrorKind,
    readonly status: number,
  ) {
    super(`${kind} (${status})`);
  }
}

export type LabCredentials = { labId: string; secret: string };

const MAX_RATE_RETRIES = 1;

function errorKind(status: number, body: unknown): ApiErrorKind {
  const error = (body as { error?: string } | null)?.error;
  switch (error) {
    case "not_found":
    case "unknown_slot":
      return "not_found";
    case "voucher_exhausted":
    case "voucher_expired":
    case "slot_full":
    case "wrong_state":
    case "rate_limited":
      return error;
    default:
      break;
  }
  if (status === 401) return "unauthorized";
  if (status === 404) return "not_found";
  if (status === 429) return "rate_limited";
  return "bad_request";
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
    auth?: LabCredentials,
    attempt = 0,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (auth) headers["Authorization"] = `Basic ${btoa(`${auth.labId}:${auth.secret}`)}`;

    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers,
        body: body !== undefined ? JSON.stringify(body) : undefined,
      });
    } catch {
      throw new ApiError("network", 0);
    }

    if (response.status === 429 && attempt < MAX_RATE_RETRIES) {
      const waitSeconds = Number(response.headers.get("Retry-After") ?? "1");
      await new Promise((resolve) => setTimeout(resolve, waitSeconds * 1000));
      return this.request(method, path, body, auth, attempt + 1);
    }

    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(errorKind(response.status, payload), response.status);
    }
    return payload as T;
  }

  listSlots(): Promise<{ slots: Slot[] }> {
    return this.request("GET", "/api/slots");
  }

  redeemAndBook(code: string, slotId: string): Promise<Booking> {
    return this.request("POST", "/api/redeem", { code, slot_id: slotId });
  }

  lookupResult(confirmationCode: string): Promise<ResultStatus> {
    return this.request("GET", `/api/results/${confirmationCode}`);
  }

  markPerformed(confirmationCode: string, auth: LabCredentials): Promise<{ status: string }> {
    return this.request(
      "POST",
      "/api/lab/performed",
      { confirmation_code: confirmationCode },
      auth,
    );
  }

  postResult(
    confirmationCode: string,
    result: "negative" | "positive" | "inconclusive",
    auth: LabCredentials,
  ): Promise<{ status: string }> {
    return this.request(
      "POST",
      "/api/lab/results",
      { confirmation_code: confirmationCode, result },
      auth,
    );
  }
}
