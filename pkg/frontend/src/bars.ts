/** Probability bar rendering. Widths are proportional to probabilities. */

export function barWidthPct(prob: number): number {
  const clamped = Math.max(0, Math.min(1, prob));
  return Math.round(clamped * 10000) / 100; // two decimals
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function probBar(prob: number, cssClass: string): string {
  const pct = barWidthPct(prob);
  return `
    <div class="bar-track">
      <div class="bar-fill ${cssClass}" style="width:${pct}%"></div>
    </div>
    <span class="bar-value">${prob.toFixed(3)}</span>
  `;
}

/** One description sentence row: text, bar, probability. */
export function sentenceRow(
  index: number,
  sentence: string,
  prob: number | null,
  highlighted: boolean,
): string {
  const bar = prob === null ? "" : probBar(prob, "bar-answer");
  return `
    <div class="sentence-row${highlighted ? " highlighted" : ""}" data-index="${index}">
      <span class="sentence-text">${escapeHtml(sentence)}</span>
      <div class="sentence-score">${bar}</div>
    </div>
  `;
}

/** The distinct no-answer bar shown above the sentences. */
export function noAnswerRow(prob: number | null, emphasized: boolean): string {
  const bar = prob === null ? "" : probBar(prob, "bar-no-answer");
  return `
    <div class="no-answer-row${emphasized ? " emphasized" : ""}" data-role="no-answer">
      <span class="sentence-text">no suitable answer</span>
      <div class="sentence-score">${bar}</div>
    </div>
  `;
}
