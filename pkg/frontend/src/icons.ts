/** Small pictograph set, one icon per technique group. */

const ICONS: Record<string, string> = {
  "facial expression":
    '<circle cx="8" cy="8" r="6" fill="none"/><circle cx="6" cy="7" r="0.9" class="fill"/><circle cx="10" cy="7" r="0.9" class="fill"/><path d="M5.5 10 Q8 12 10.5 10" fill="none"/>',
  "eye contact":
    '<path d="M2 8 Q8 3 14 8 Q8 13 2 8 Z" fill="none"/><circle cx="8" cy="8" r="2" class="fill"/>',
  "use of stage":
    '<rect x="2" y="3" width="12" height="10" rx="1" fill="none"/><circle cx="8" cy="6.6" r="1.4" class="fill"/><path d="M8 8 V11 M6.4 9.4 H9.6" fill="none"/>',
  "body gesture":
    '<circle cx="8" cy="4" r="1.6" class="fill"/><path d="M8 6 V10 M8 7 L4 5.4 M8 7 L12 5 M8 10 L5.6 13.4 M8 10 L10.4 13.4" fill="none"/>',
  voice:
    '<path d="M3 6.5 H5.5 L9 3.5 V12.5 L5.5 9.5 H3 Z" class="fill"/><path d="M11 6 Q12.4 8 11 10 M12.6 4.6 Q14.8 8 12.6 11.4" fill="none"/>',
  pace:
    '<circle cx="8" cy="8" r="6" fill="none"/><path d="M8 4.5 V8 L10.8 9.6" fill="none"/>',
};

export function techniqueIcon(technique: string): string {
  const body = ICONS[technique] ?? '<circle cx="8" cy="8" r="6" fill="none"/>';
  return `<svg class="icon" viewBox="0 0 16 16" aria-hidden="true">${body}</svg>`;
}

export const STATISTIC_MARK: Record<string, string> = {
  average: "x̄",
  volatility: "≋",
  dispersion: "↔",
  ratio: "%",
  diversity: "✳",
};
