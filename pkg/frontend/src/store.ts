/**
 * Board state with optimistic mutations.
 *
 * Every decision is applied to the local board immediately in a "pending"
 * state, then confirmed against the server's revision: if the acknowledged
 * revision is exactly ours+1 the local change is committed; if other writers
 * interleaved, the whole board is refetched (server is the source of truth).
 * A rejected mutation restores the pre-mutation snapshot and raises a toast.
 *
 * Hidden snippets are a pure view-layer set: hiding a snippet never touches
 * the server.
 */
import { ApiClient, BoardView, Candidate, DecisionKind, Snippet } from "./api.js";

export interface PendingCandidate extends Candidate {
  pending?: boolean;
}

export type Listener = () => void;

export class BoardStore {
  board: BoardView | null = null;
  toasts: string[] = [];
  dragging: { type: string; word: string } | null = null;

  // view-layer state: never sent to the server
  hiddenSnippets = new Set<string>();
  openCards = new Set<string>(); // `${type}:${word}` with snippets shown
  snippetCache = new Map<string, Snippet[]>();
  expandedSnippets = new Map<string, string>(); // snippet key -> full sentence

  private listeners: Listener[] = [];
  private inflight = 0;

  constructor(readonly api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Force a re-render after view-only state changes (snippet loads etc.). */
  redraw(): void {
    this.notify();
  }

  toast(message: string): void {
    this.toasts.push(message);
    this.notify();
  }

  /** True while any mutation is awaiting server acknowledgment. */
  get settled(): boolean {
    return this.inflight === 0;
  }

  async refresh(): Promise<void> {
    this.board = await this.api.getBoard();
    this.notify();
  }

  private column(type: string) {
    return this.board?.columns.find((c) => c.type === type);
  }

  private snapshot(): BoardView {
    return structuredClone(this.board!) as BoardView;
  }

  /**
   * Run one server mutation with an optimistic local application.
   * apply() mutates this.board in place (pending state); the server response
   * either commits it (revision advanced by exactly one) or forces a
   * refetch; failures restore the snapshot.
   */
  private async mutate(
    apply: () => void,
    remote: () => Promise<{ revision: number }>,
    label: string,
  ): Promise<void> {
    if (!this.board) throw new Error("board not loaded");
    const before = this.snapshot();
    apply();
    this.inflight += 1;
    this.notify();
    try {
      const ack = await remote();
      if (ack.revision === before.revision + 1) {
        this.board!.revision = ack.revision;
        this.clearPending();
      } else {
        // another writer got in between; trust the server
        this.board = await this.api.getBoard();
      }
    } catch (error) {
      this.board = before;
      this.toasts.push(`${label} failed: ${(error as Error).message}`);
    } finally {
      this.inflight -= 1;
      this.notify();
    }
  }

  private clearPending(): void {
    for (const column of this.board!.columns) {
      for (const candidate of column.candidates as PendingCandidate[]) {
        delete candidate.pending;
      }
    }
  }

  decide(type: string, word: string, decision: DecisionKind, target?: string): Promise<void> {
    return this.mutate(
      () => this.applyDecision(type, word, decision, target),
      () => this.api.decide(type, word, decision, target),
      `${decision} ${word}`,
    );
  }

  private applyDecision(
    type: string,
    word: string,
    decision: DecisionKind,
    target?: string,
  ): void {
    const column = this.column(type);
    const candidate = column?.candidates.find((c) => c.word === word) as
      | PendingCandidate
      | undefined;
    if (!column || !candidate) return; // server will report the error
    if (decision === "move" && target) {
      column.candidates = column.candidates.filter((c) => c.word !== word);
      const destination = this.column(target);
      if (destination && !destination.candidates.some((c) => c.word === word)) {
        const moved: PendingCandidate = {
          ...candidate,
          status: "accepted",
          pending: true,
        };
        destination.candidates.push(moved);
      }
    } else if (decision === "accept" || decision === "reject") {
      candidate.status = decision === "accept" ? "accepted" : "rejected";
      candidate.pending = true;
    }
  }

  addType(name: string): Promise<void> {
    return this.mutate(
      () => {
        this.board!.columns.push({ type: name, candidates: [] });
      },
      () => this.api.addType(name),
      `add type ${name}`,
    );
  }

  removeType(name: string): Promise<void> {
    return this.mutate(
      () => {
        this.board!.columns = this.board!.columns.filter((c) => c.type !== name);
      },
      () => this.api.deleteType(name),
      `remove type ${name}`,
    );
  }

  async addSeeds(type: string, words: string[]): Promise<void> {
    await this.mutate(
      () => {
        const column = this.column(type);
        if (!column) return;
        for (const raw of words) {
          const word = raw.trim().toLowerCase();
          if (word && !column.candidates.some((c) => c.word === word)) {
            (column.candidates as PendingCandidate[]).push({
              word,
              source: ["seed"],
              score: null,
              status: "accepted",
              pending: true,
            });
          }
        }
      },
      () => this.api.addSeeds(type, words),
      `seed ${type}`,
    );
  }

  /** Expansion results are server-computed, so no optimistic application:
   * the board refetches after acknowledgment. */
  async expand(type: string): Promise<void> {
    if (!this.board) throw new Error("board not loaded");
    this.inflight += 1;
    try {
      await this.api.expandType(type);
      this.board = await this.api.getBoard();
    } catch (error) {
      this.toasts.push(`expand ${type} failed: ${(error as Error).message}`);
    } finally {
      this.inflight -= 1;
      this.notify();
    }
  }

  snippetKey(snippet: { doc_id: string; sentence: number; match: { s: number } }): string {
    return `${snippet.doc_id}:${snippet.sentence}:${snippet.match.s}`;
  }

  hideSnippet(key: string): void {
    this.hiddenSnippets.add(key);
    this.notify();
  }
}
