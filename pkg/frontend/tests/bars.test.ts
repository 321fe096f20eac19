import { describe, expect, it } from "vitest";
import { barWidthPct, escapeHtml, noAnswerRow, probBar, sentenceRow } from "../src/bars.js";

describe("barWidthPct", () => {
  it("is proportional to the probability", () => {
    expect(barWidthPct(0)).toBe(0);
    expect(barWidthPct(0.25)).toBe(25);
    expect(barWidthPct(0.5)).toBe(50);
    expect(barWidthPct(1)).toBe(100);
    // proportionality: double prob, double width
    expect(barWidthPct(0.4)).toBeCloseTo(2 * barWidthPct(0.2), 10);
  });

  it("clamps out-of-range values", () => {
    expect(barWidthPct(-0.5)).toBe(0);
    expect(barWidthPct(1.5)).toBe(100);
  });
});

describe("probBar", () => {
  it("uses the probability for width and label", () => {
    const html = probBar(0.642, "bar-answer");
    expect(html).toContain("width:64.2%");
    expect(html).toContain("0.642");
    expect(html).toContain("bar-answer");
  });
});

describe("sentenceRow", () => {
  it("escapes sentence text", () => {
    const html = sentenceRow(0, "<b>bold</b> & more", 0.5, false);
    expect(html).toContain("&lt;b&gt;bold&lt;/b&gt; &amp; more");
    expect(html).not.toContain("<b>bold");
  });

  it("marks the highlighted row", () => {
    expect(sentenceRow(2, "s", 0.9, true)).toContain("highlighted");
    expect(sentenceRow(2, "s", 0.9, false)).not.toContain("highlighted");
  });

  it("keeps a stable row identity via data-index", () => {
    expect(sentenceRow(3, "s", 0.1, false)).toContain('data-index="3"');
  });

  it("omits the bar before any response", () => {
    expect(sentenceRow(0, "s", null, false)).not.toContain("bar-track");
  });
});

describe("noAnswerRow", () => {
  it("is emphasized when no-answer dominates", () => {
    expect(noAnswerRow(0.8, true)).toContain("emphasized");
    expect(noAnswerRow(0.1, false)).not.toContain("emphasized");
  });

  it("uses the distinct no-answer style", () => {
    expect(noAnswerRow(0.5, false)).toContain("bar-no-answer");
  });
});

describe("escapeHtml", () => {
  it("escapes angle brackets, ampersands, quotes", () => {
    expect(escapeHtml(`<a href="x">&`)).toBe("&lt;a href=&quot;x&quot;&gt;&amp;");
  });
});
