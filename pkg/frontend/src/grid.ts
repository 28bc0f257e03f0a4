// View model for the variant grid: one group per lyric line, one card per
// variant, data passed through from the project payload untouched.

import type { ProjectView, SyllableView, VariantView } from "./types.js";

export interface VariantCard {
  lineIndex: number;
  variantIndex: number;
  variant: VariantView;
  syllables: SyllableView[] | undefined;
  selected: boolean;
}

export interface LineGroup {
  lineIndex: number;
  lyric: string;
  cards: VariantCard[];
}

export function buildGrid(project: ProjectView): LineGroup[] {
  const variants = project.variants ?? [];
  return variants.map((lineVariants, lineIndex) => ({
    lineIndex,
    lyric: project.lyric_lines[lineIndex],
    cards: lineVariants.map((variant, variantIndex) => ({
      lineIndex,
      variantIndex,
      variant,
      syllables: project.syllables?.[lineIndex],
      selected: project.selections[String(lineIndex)] === variantIndex,
    })),
  }));
}

export function missingSelections(project: ProjectView): number[] {
  const lines = project.variants?.length ?? project.lyric_lines.length;
  const missing: number[] = [];
  for (let i = 0; i < lines; i++) {
    if (!(String(i) in project.selections)) missing.push(i);
  }
  return missing;
}

export function exportReady(project: ProjectView): boolean {
  return (project.variants?.length ?? 0) > 0
    && missingSelections(project).length === 0;
}

/** Banner text for the current service state; empty when all is well. */
export function trainingBannerMessage(health: { models_loaded: boolean } | null): string {
  if (health === null) return "Service unreachable.";
  if (!health.models_loaded) {
    return "Models are not trained yet; upload a corpus and train before generating.";
  }
  return "";
}
