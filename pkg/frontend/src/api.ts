/** Typed client for the curation service HTTP+JSON API. */

export interface Candidate {
  word: string;
  source: string[];
  score: number | null;
  status: "pending" | "accepted" | "rejected";
}

export interface Column {
  type: string;
  candidates: Candidate[];
}

export interface SimilarEntry {
  word: string;
  score: number;
  via: string;
}

export interface BoardView {
  revision: number;
  name: string;
  config: Record<string, unknown>;
  columns: Column[];
  similar: SimilarEntry[];
}

export interface Snippet {
  doc_id: string;
  sentence: number;
  text: string;
  match: { s: number; e: number };
}

export interface SentenceView {
  doc_id: string;
  index: number;
  text: string;
  tokens: { t: string; s: number; e: number }[];
}

export interface MutationAck {
  revision: number;
}

export type DecisionKind = "accept" | "reject" | "move";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getBoard(): Promise<BoardView> {
    return this.request("/api/board");
  }

  addType(name: string): Promise<MutationAck> {
    return this.request("/api/types", {
      method: "POST",
      body: JSON.stringify({ name }),
    });
  }

  deleteType(name: string): Promise<MutationAck> {
    return this.request(`/api/types/${encodeURIComponent(name)}`, {
      method: "DELETE",
    });
  }

  addSeeds(type: string, words: string[]): Promise<MutationAck> {
    return this.request(`/api/types/${encodeURIComponent(type)}/seeds`, {
      method: "POST",
      body: JSON.stringify({ words }),
    });
  }

  expandType(
    type: string,
    opts: { k?: number; min_sim?: number; max_depth?: number } = {},
  ): Promise<MutationAck & { added: string[] }> {
    return this.request(`/api/types/${encodeURIComponent(type)}/expand`, {
      method: "POST",
      body: JSON.stringify(opts),
    });
  }

  decide(
    type: string,
    word: string,
    decision: DecisionKind,
    target?: string,
  ): Promise<MutationAck> {
    return this.request("/api/decision", {
      method: "POST",
      body: JSON.stringify({ type, word, decision, target }),
    });
  }

  getSnippets(type: string, word: string, limit = 10): Promise<{ snippets: Snippet[] }> {
    const params = new URLSearchParams({ type, word, limit: String(limit) });
    return this.request(`/api/snippets?${params}`);
  }

  getSentence(doc: string, index: number): Promise<SentenceView> {
    const params = new URLSearchParams({ doc, index: String(index) });
    return this.request(`/api/sentence?${params}`);
  }

  getSimilar(word: string, k = 10): Promise<{
    word: string;
    oov: boolean;
    neighbors: { word: string; score: number }[];
  }> {
    const params = new URLSearchParams({ word, k: String(k) });
    return this.request(`/api/similar?${params}`);
  }
}
