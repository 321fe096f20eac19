import { escapeHtml, noAnswerRow, sentenceRow } from "./bars.js";
import { highlightedIndex } from "./state.js";
import type { ListingSummary, ScoreResponse, SessionTurn } from "./types.js";

/**
 * Description panel. Sentences always render in description order; the
 * ranking is conveyed only through bars and the highlight, never by
 * reordering. All numbers come straight from the response.
 */
export function renderDescription(
  listing: ListingSummary,
  res: ScoreResponse | null,
): string {
  const probByIndex = new Map<number, number>();
  if (res) {
    for (const a of res.answers) probByIndex.set(a.index, a.prob);
  }
  const highlight = res ? highlightedIndex(res) : null;
  const rows = listing.sentences.map((sentence, i) =>
    sentenceRow(i, sentence, res ? (probByIndex.get(i) ?? 0) : null, highlight === i),
  );
  const noAnswer = noAnswerRow(res ? res.no_answer_prob : null,
    res !== null && highlight === null);
  return noAnswer + rows.join("");
}

export function renderListingHeader(listing: ListingSummary): string {
  return `<h2>${escapeHtml(listing.title)}</h2>
    <p class="listing-id">${escapeHtml(listing.id)}</p>`;
}

export function renderHistory(turns: SessionTurn[]): string {
  if (turns.length === 0) return `<p class="muted">no questions yet</p>`;
  return turns
    .map((t) => {
      const answer = t.topSentence === null
        ? `<em>no suitable answer (p=${t.noAnswerProb.toFixed(3)})</em>`
        : escapeHtml(t.topSentence);
      return `<div class="turn">
        <div class="turn-q">${escapeHtml(t.question)}</div>
        <div class="turn-a">${answer}</div>
      </div>`;
    })
    .join("");
}

export function renderStatus(res: ScoreResponse): string {
  const truncated = res.truncated ? " · truncated to 50 sentences" : "";
  return `model ${escapeHtml(res.model_variant)} · ${res.latency_ms.toFixed(1)} ms${truncated}`;
}

export function renderError(message: string): string {
  return `<div class="error-banner">${escapeHtml(message)}</div>`;
}
