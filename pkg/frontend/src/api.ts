/** Typed client for the foodrag gateway JSON API. */

export interface QueryItem {
  id: string;
  name: string;
  food_group: string | null;
  components: Record<string, number>;
  distance: number | null;
}

export interface AttemptInfo {
  tier: string;
  error: string | null;
}

export interface QueryResponse {
  filter_document: Record<string, unknown>;
  tier: "Strict" | "Loose" | "Semantic";
  threshold_used: number | null;
  items: QueryItem[];
  attempts: AttemptInfo[];
  duration_ms: number;
}

export interface HealthResponse {
  status: string;
  store_size: number;
  backend_kinds: Record<string, string>;
}

export interface SchemaField {
  name: string;
  kind: "numeric" | "categorical";
  unit: string | null;
}

export class GatewayError extends Error {
  constructor(message: string, readonly status: number | null) {
    super(message);
    this.name = "GatewayError";
  }

  get backendsUnavailable(): boolean {
    return this.status === 502;
  }
}

async function errorFrom(response: Response): Promise<GatewayError> {
  let detail = "";
  try {
    const body = (await response.json()) as { error?: string };
    detail = body.error ?? "";
  } catch {
    /* non-JSON error body */
  }
  return new GatewayError(detail || `gateway returned ${response.status}`, response.status);
}

export class GatewayClient {
  constructor(readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async health(): Promise<HealthResponse> {
    const response = await fetch(this.url("/api/health"));
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as HealthResponse;
  }

  async query(question: string): Promise<QueryResponse> {
    const response = await fetch(this.url("/api/query"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ question }),
    });
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as QueryResponse;
  }

  async groups(): Promise<string[]> {
    const response = await fetch(this.url("/api/groups"));
    if (!response.ok) throw await errorFrom(response);
    return ((await response.json()) as { groups: string[] }).groups;
  }

  async schema(): Promise<SchemaField[]> {
    const response = await fetch(this.url("/api/schema"));
    if (!response.ok) throw await errorFrom(response);
    return ((await response.json()) as { fields: SchemaField[] }).fields;
  }
}
