import { ApiClient } from "./api.js";
import { renderBoard } from "./board.js";
import { BoardStore } from "./store.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const store = new BoardStore(new ApiClient(""));
store.subscribe(() => renderBoard(store, root));
void store.refresh();
