import type {
  HistoryMessage,
  ListingSummary,
  ScoreResponse,
  SessionTurn,
} from "./types.js";

/**
 * Session state. Responses are only accepted for the newest request:
 * every submission takes a monotonically increasing sequence number, and
 * stale arrivals are dropped so a slow earlier answer can never
 * overwrite a newer one.
 */
export class UIState {
  listing: ListingSummary | null = null;
  lastResponse: ScoreResponse | null = null;
  turns: SessionTurn[] = []; // append-only within a session
  sendHistory = false;
  private seq = 0;
  private rendered = 0;

  selectListing(listing: ListingSummary): void {
    this.listing = listing;
    this.lastResponse = null;
    this.turns = [];
    this.seq = 0;
    this.rendered = 0;
  }

  nextRequest(): number {
    return ++this.seq;
  }

  /** Accept a response only if it belongs to the newest request. */
  acceptResponse(requestId: number, question: string, res: ScoreResponse): boolean {
    if (requestId !== this.seq || requestId <= this.rendered) return false;
    this.rendered = requestId;
    this.lastResponse = res;
    const top = res.answers.length > 0 ? res.answers[0] : null;
    const noAnswerWins = top === null || res.no_answer_prob >= top.prob;
    this.turns.push({
      question,
      topSentence: noAnswerWins ? null : top.sentence,
      noAnswerProb: res.no_answer_prob,
    });
    return true;
  }

  /** Conversation so far as service history (buyer questions + implied replies). */
  historyMessages(): HistoryMessage[] {
    const messages: HistoryMessage[] = [];
    for (const turn of this.turns) {
      messages.push({ speaker: "buyer", text: turn.question });
      if (turn.topSentence !== null) {
        messages.push({ speaker: "seller", text: turn.topSentence });
      }
    }
    return messages;
  }
}

/** Index of the highlighted sentence, or null when no-answer dominates. */
export function highlightedIndex(res: ScoreResponse): number | null {
  if (res.answers.length === 0) return null;
  const top = res.answers[0];
  return res.no_answer_prob >= top.prob ? null : top.index;
}
