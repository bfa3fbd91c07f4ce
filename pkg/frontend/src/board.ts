/**
 * DOM rendering for the curation board: one column per event type with
 * draggable trigger cards and lazily loaded snippets, plus the leftmost
 * similar-triggers column. Drag a card onto another column to move the
 * trigger; "−" on a card rejects it, "−" on a snippet hides it locally,
 * clicking a snippet expands it to its full sentence.
 */
import { Snippet } from "./api.js";
import { BoardStore, PendingCandidate } from "./store.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderSnippet(store: BoardStore, snippet: Snippet): HTMLElement | null {
  const key = store.snippetKey(snippet);
  if (store.hiddenSnippets.has(key)) return null;
  const item = el("li", "snippet");
  const text = el("span", "snippet-text");
  const expanded = store.expandedSnippets.get(key);
  if (expanded !== undefined) {
    text.textContent = expanded;
    text.classList.add("expanded");
  } else {
    const before = snippet.text.slice(0, snippet.match.s);
    const match = snippet.text.slice(snippet.match.s, snippet.match.e);
    const after = snippet.text.slice(snippet.match.e);
    text.append(before, el("mark", "trigger-hit", match), after);
    text.addEventListener("click", async () => {
      const sentence = await store.api.getSentence(snippet.doc_id, snippet.sentence);
      store.expandedSnippets.set(key, sentence.text);
      store.redraw();
    });
  }
  const hide = el("button", "remove-snippet", "−");
  hide.title = "hide this snippet (display only)";
  hide.addEventListener("click", () => store.hideSnippet(key));
  item.append(text, hide);
  return item;
}

function renderCard(
  store: BoardStore,
  type: string,
  candidate: PendingCandidate,
): HTMLElement {
  const card = el("li", `card ${candidate.status}${candidate.pending ? " inflight" : ""}`);
  card.draggable = true;
  card.dataset.word = candidate.word;
  card.dataset.type = type;
  card.addEventListener("dragstart", () => {
    store.dragging = { type, word: candidate.word };
  });

  const word = el("span", "word", candidate.word);
  word.addEventListener("click", async () => {
    const cardKey = `${type}:${candidate.word}`;
    if (store.openCards.has(cardKey)) {
      store.openCards.delete(cardKey);
    } else {
      store.openCards.add(cardKey);
      if (!store.snippetCache.has(cardKey)) {
        const result = await store.api.getSnippets(type, candidate.word, 10);
        store.snippetCache.set(cardKey, result.snippets);
      }
    }
    store.redraw();
  });
  const badges = el("span", "badges", candidate.source.join("+"));
  if (candidate.score !== null) {
    badges.textContent += ` ${candidate.score.toFixed(2)}`;
  }
  card.append(word, badges);

  if (candidate.status !== "accepted") {
    const accept = el("button", "accept", "✓");
    accept.title = "accept";
    accept.addEventListener("click", () =>
      store.decide(type, candidate.word, "accept"),
    );
    card.append(accept);
  }
  const reject = el("button", "remove-card", "−");
  reject.title = "reject this trigger";
  reject.addEventListener("click", () =>
    store.decide(type, candidate.word, "reject"),
  );
  card.append(reject);

  const cardKey = `${type}:${candidate.word}`;
  if (store.openCards.has(cardKey)) {
    const list = el("ul", "snippets");
    for (const snippet of store.snippetCache.get(cardKey) ?? []) {
      const node = renderSnippet(store, snippet);
      if (node) list.append(node);
    }
    card.append(list);
  }
  return card;
}

function renderColumn(store: BoardStore, type: string,
                      candidates: PendingCandidate[]): HTMLElement {
  const column = el("section", "column");
  column.dataset.type = type;
  column.addEventListener("dragover", (event) => event.preventDefault());
  column.addEventListener("drop", () => {
    const drag = store.dragging;
    store.dragging = null;
    if (drag && drag.type !== type) {
      void store.decide(drag.type, drag.word, "move", type);
    }
  });

  const header = el("header");
  header.append(el("h2", "type-name", type));
  const remove = el("button", "remove-column", "−");
  remove.title = "remove event type";
  remove.addEventListener("click", () => store.removeType(type));
  const expandButton = el("button", "expand", "expand");
  expandButton.addEventListener("click", () => store.expand(type));
  header.append(expandButton, remove);
  column.append(header);

  const seedForm = el("form", "seed-form");
  const seedInput = el("input");
  seedInput.placeholder = "seed words, comma separated";
  seedForm.append(seedInput);
  seedForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const words = seedInput.value.split(",").map((w) => w.trim()).filter(Boolean);
    if (words.length) void store.addSeeds(type, words);
    seedInput.value = "";
  });
  column.append(seedForm);

  const cards = el("ul", "cards");
  for (const candidate of candidates) {
    cards.append(renderCard(store, type, candidate));
  }
  column.append(cards);
  return column;
}

export function renderBoard(store: BoardStore, root: HTMLElement): void {
  root.textContent = "";
  const board = store.board;
  if (!board) {
    root.append(el("p", "loading", "loading board…"));
    return;
  }

  const toolbar = el("form", "toolbar");
  const nameInput = el("input");
  nameInput.placeholder = "new event type";
  nameInput.id = "new-type-name";
  toolbar.append(nameInput);
  toolbar.addEventListener("submit", (event) => {
    event.preventDefault();
    if (nameInput.value.trim()) void store.addType(nameInput.value.trim());
    nameInput.value = "";
  });
  root.append(toolbar);

  const columns = el("div", "board");
  const similar = el("section", "column similar");
  similar.append(el("h2", "type-name", "similar triggers"));
  const similarList = el("ul", "cards");
  for (const entry of board.similar) {
    const item = el("li", "card similar-entry");
    item.append(
      el("span", "word", entry.word),
      el("span", "badges", `≈ ${entry.via} ${entry.score.toFixed(2)}`),
    );
    similarList.append(item);
  }
  similar.append(similarList);
  columns.append(similar);

  for (const column of board.columns) {
    columns.append(
      renderColumn(store, column.type, column.candidates as PendingCandidate[]),
    );
  }
  root.append(columns);

  const toasts = el("ul", "toasts");
  for (const message of store.toasts.filter(Boolean).slice(-3)) {
    toasts.append(el("li", "toast", message));
  }
  root.append(toasts);

  const status = el("footer", "status",
    `revision ${board.revision}${store.settled ? "" : " (saving…)"}`);
  root.append(status);
}
