// Constraint form -> the exact line grammar the service parses.
// Client-side validation produces field messages only; the server remains
// the sole authority on token surfaces and feasibility.

export interface PinField {
  position: number;
  surface: string;
}

export interface RhymeField {
  position: number;
  suffix: string;
}

export interface FilterField {
  name: string;
  argument: string;
  positions: number[] | "all";
}

export interface ConstraintForm {
  length: number;
  pins?: PinField[];
  lipogramLetters?: string;
  lipogramPositions?: number[] | "all";
  rhymes?: RhymeField[];
  filters?: FilterField[];
}

export interface FieldError {
  field: string;
  message: string;
}

export function validateForm(form: ConstraintForm): FieldError[] {
  const errors: FieldError[] = [];
  if (!Number.isInteger(form.length) || form.length < 1) {
    errors.push({ field: "length", message: "length must be a positive integer" });
    return errors;
  }
  const checkPosition = (field: string, position: number) => {
    if (!Number.isInteger(position) || position < 0 || position >= form.length) {
      errors.push({ field, message: `position must be in 0..${form.length - 1}` });
    }
  };
  for (const [i, pin] of (form.pins ?? []).entries()) {
    checkPosition(`pins[${i}].position`, pin.position);
    if (!pin.surface || /\s/.test(pin.surface)) {
      errors.push({ field: `pins[${i}].surface`, message: "surface must be one word" });
    }
  }
  const letters = form.lipogramLetters ?? "";
  if (letters && !/^[a-zA-Z]+$/.test(letters)) {
    errors.push({ field: "lipogramLetters", message: "letters must be alphabetic" });
  }
  if (Array.isArray(form.lipogramPositions)) {
    for (const p of form.lipogramPositions) {
      checkPosition("lipogramPositions", p);
    }
  }
  for (const [i, rhyme] of (form.rhymes ?? []).entries()) {
    checkPosition(`rhymes[${i}].position`, rhyme.position);
    if (!rhyme.suffix || /\s/.test(rhyme.suffix)) {
      errors.push({ field: `rhymes[${i}].suffix`, message: "suffix must be non-empty" });
    }
  }
  for (const [i, filter] of (form.filters ?? []).entries()) {
    if (!filter.name || /\s/.test(filter.name)) {
      errors.push({ field: `filters[${i}].name`, message: "filter needs a name" });
    }
    if (!filter.argument || /\s/.test(filter.argument)) {
      errors.push({ field: `filters[${i}].argument`, message: "filter needs an argument" });
    }
    if (filter.positions !== "all") {
      for (const p of filter.positions) {
        checkPosition(`filters[${i}].positions`, p);
      }
    }
  }
  return errors;
}

/** Render the spec text; throws if the form does not validate. */
export function renderSpec(form: ConstraintForm): string {
  const errors = validateForm(form);
  if (errors.length > 0) {
    throw new Error(errors.map((e) => `${e.field}: ${e.message}`).join("; "));
  }
  const lines = [`length ${form.length}`];
  for (const pin of form.pins ?? []) {
    lines.push(`pin ${pin.position} ${pin.surface}`);
  }
  if (form.lipogramLetters) {
    const letters = [...new Set(form.lipogramLetters.toLowerCase())].sort().join("");
    if (form.lipogramPositions && form.lipogramPositions !== "all") {
      const at = [...form.lipogramPositions].sort((a, b) => a - b).join(",");
      lines.push(`lipogram ${letters} at ${at}`);
    } else {
      lines.push(`lipogram ${letters}`);
    }
  }
  for (const rhyme of form.rhymes ?? []) {
    lines.push(`rhyme ${rhyme.position} ${rhyme.suffix}`);
  }
  for (const filter of form.filters ?? []) {
    const at =
      filter.positions === "all"
        ? "all"
        : [...filter.positions].sort((a, b) => a - b).join(",");
    lines.push(`filter ${filter.name} ${filter.argument} at ${at}`);
  }
  return lines.join("\n");
}

/** Append a pin line for the given position to an existing spec text. */
export function addPinLine(spec: string, position: number, surface: string): string {
  const trimmed = spec.replace(/\n+$/, "");
  return `${trimmed}\npin ${position} ${surface}`;
}
