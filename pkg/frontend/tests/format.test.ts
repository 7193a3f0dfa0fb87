import { describe, expect, test } from "vitest";
import { MISSING, compactDocument, escapeHtml, formatCell, heatColor } from "../src/format.js";

describe("formatCell", () => {
  test("always three decimals", () => {
    expect(formatCell(0.5)).toBe("0.500");
    expect(formatCell(1)).toBe("1.000");
    expect(formatCell(0.28888888888888886)).toBe("0.289");
    expect(formatCell(-1)).toBe("-1.000");
  });

  test("missing values render as a dash, never zero", () => {
    expect(formatCell(null)).toBe(MISSING);
    expect(formatCell(null)).not.toBe("0.000");
  });
});

describe("heatColor", () => {
  test("missing cells get no color", () => {
    expect(heatColor(null)).toBe("transparent");
  });

  test("positive and negative values use different hues", () => {
    expect(heatColor(1)).toContain("#1a7f37");
    expect(heatColor(-1)).toContain("#b42318");
  });

  test("out-of-range input is clamped rather than overflowing the mix", () => {
    expect(heatColor(5)).toBe(heatColor(1));
  });
});

describe("escapeHtml", () => {
  test("neutralizes markup metacharacters", () => {
    expect(escapeHtml(`<b a="x">&'`)).toBe("&lt;b a=&quot;x&quot;&gt;&amp;&#39;");
  });
});

describe("compactDocument", () => {
  test("one line, key=value, structured values as JSON", () => {
    expect(compactDocument({ code: "question", confidence: 0.5 })).toBe(
      "code=question confidence=0.5",
    );
    expect(compactDocument({ tags: ["a", "b"] })).toBe('tags=["a","b"]');
  });
});
