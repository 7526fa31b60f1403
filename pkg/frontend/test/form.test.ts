import { describe, expect, it } from "vitest";

import { addPinLine, renderSpec, validateForm } from "../src/form.js";

describe("renderSpec", () => {
  it("renders length plus lipogram exactly", () => {
    expect(renderSpec({ length: 6, lipogramLetters: "a" })).toBe("length 6\nlipogram a");
  });

  it("renders the full grammar in order", () => {
    const spec = renderSpec({
      length: 5,
      pins: [
        { position: 0, surface: "Beyond" },
        { position: 4, surface: "unforeseen." },
      ],
      lipogramLetters: "a",
      rhymes: [{ position: 3, suffix: "een" }],
      filters: [{ name: "startswith", argument: "un", positions: [2, 1] }],
    });
    expect(spec).toBe(
      [
        "length 5",
        "pin 0 Beyond",
        "pin 4 unforeseen.",
        "lipogram a",
        "rhyme 3 een",
        "filter startswith un at 1,2",
      ].join("\n"),
    );
  });

  it("normalizes lipogram letters to sorted lowercase uniques", () => {
    expect(renderSpec({ length: 2, lipogramLetters: "baA" })).toBe("length 2\nlipogram ab");
  });

  it("renders positioned lipograms", () => {
    expect(
      renderSpec({ length: 4, lipogramLetters: "e", lipogramPositions: [3, 0] }),
    ).toBe("length 4\nlipogram e at 0,3");
  });

  it("throws on an invalid form", () => {
    expect(() => renderSpec({ length: 0 })).toThrowError(/length/);
  });
});

describe("validateForm", () => {
  it("flags missing length first", () => {
    const errors = validateForm({ length: Number.NaN });
    expect(errors).toHaveLength(1);
    expect(errors[0]!.field).toBe("length");
  });

  it("flags out-of-range positions", () => {
    const errors = validateForm({ length: 3, pins: [{ position: 3, surface: "sun" }] });
    expect(errors.some((e) => e.field === "pins[0].position")).toBe(true);
  });

  it("flags non-alphabetic lipogram letters", () => {
    const errors = validateForm({ length: 3, lipogramLetters: "a1" });
    expect(errors.some((e) => e.field === "lipogramLetters")).toBe(true);
  });

  it("flags empty rhyme suffixes", () => {
    const errors = validateForm({ length: 3, rhymes: [{ position: 1, suffix: "" }] });
    expect(errors.some((e) => e.field === "rhymes[0].suffix")).toBe(true);
  });

  it("accepts a complete valid form", () => {
    expect(
      validateForm({
        length: 4,
        pins: [{ position: 0, surface: "sun" }],
        lipogramLetters: "qz",
        rhymes: [{ position: 3, suffix: "ne" }],
        filters: [{ name: "contains", argument: "o", positions: "all" }],
      }),
    ).toEqual([]);
  });
});

describe("addPinLine", () => {
  it("appends a pin to an existing spec", () => {
    expect(addPinLine("length 3\nlipogram a\n", 1, "moon")).toBe(
      "length 3\nlipogram a\npin 1 moon",
    );
  });
});
