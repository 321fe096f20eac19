import { ApiClient } from "./api.js";
import {
  renderDescription,
  renderError,
  renderHistory,
  renderListingHeader,
  renderStatus,
} from "./render.js";
import { UIState } from "./state.js";

const base = (window as unknown as { MQA_BASE?: string }).MQA_BASE ?? "";
const api = new ApiClient(base);
const state = new UIState();

const el = (id: string) => document.getElementById(id)!;

async function loadCatalog(): Promise<void> {
  try {
    const listings = await api.listListings();
    const select = el("listing-select") as HTMLSelectElement;
    select.innerHTML = listings
      .map((l) => `<option value="${l.id}">${l.title} (${l.id})</option>`)
      .join("");
    if (listings.length > 0) await selectListing(listings[0].id);
  } catch (err) {
    el("description").innerHTML = renderError(
      `service unreachable: ${(err as Error).message}`,
    );
  }
}

async function selectListing(id: string): Promise<void> {
  try {
    const listing = await api.getListing(id);
    state.selectListing(listing);
    el("listing-header").innerHTML = renderListingHeader(listing);
    el("description").innerHTML = renderDescription(listing, null);
    el("history").innerHTML = renderHistory(state.turns);
    el("status").textContent = "";
  } catch (err) {
    const message = (err as Error).message === "not-found"
      ? `listing ${id} not found`
      : `failed to load listing: ${(err as Error).message}`;
    el("description").innerHTML = renderError(message);
  }
}

async function ask(): Promise<void> {
  const input = el("question") as HTMLInputElement;
  const question = input.value.trim();
  if (!question || !state.listing) return;
  const requestId = state.nextRequest();
  const history = state.sendHistory ? state.historyMessages() : null;
  try {
    const res = await api.score(question, state.listing.sentences, history);
    if (!state.acceptResponse(requestId, question, res)) return; // stale
    el("description").innerHTML = renderDescription(state.listing, res);
    el("history").innerHTML = renderHistory(state.turns);
    el("status").textContent = renderStatus(res);
    input.value = "";
  } catch (err) {
    el("status").innerHTML = renderError((err as Error).message);
  }
}

function wire(): void {
  (el("listing-select") as HTMLSelectElement).addEventListener("change", (e) => {
    void selectListing((e.target as HTMLSelectElement).value);
  });
  el("ask-button").addEventListener("click", () => void ask());
  (el("question") as HTMLInputElement).addEventListener("keydown", (e) => {
    if (e.key === "Enter") void ask();
  });
  (el("send-history") as HTMLInputElement).addEventListener("change", (e) => {
    state.sendHistory = (e.target as HTMLInputElement).checked;
  });
  void loadCatalog();
}

document.addEventListener("DOMContentLoaded", wire);
