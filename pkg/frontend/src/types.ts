export interface ListingSummary {
  id: string;
  title: string;
  sentences: string[];
}

export interface AnswerRow {
  index: number;
  sentence: string;
  prob: number;
  raw_score: number;
}

export interface ScoreResponse {
  no_answer_prob: number;
  answers: AnswerRow[];
  model_variant: string;
  latency_ms: number;
  truncated: boolean;
}

export interface HistoryMessage {
  speaker: "buyer" | "seller";
  text: string;
}

export interface SessionTurn {
  question: string;
  topSentence: string | null; // null when no-answer dominated
  noAnswerProb: number;
}
