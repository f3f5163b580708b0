// Stable prompt colors: keyed by the prompt string, not its list position,
// so re-ordering or re-querying never recolors an existing prompt.

export interface Rgb {
  r: number;
  g: number;
  b: number;
}

function hashString(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

function hslToRgb(h: number, s: number, l: number): Rgb {
  const c = (1 - Math.abs(2 * l - 1)) * s;
  const hp = h / 60;
  const x = c * (1 - Math.abs((hp % 2) - 1));
  let rgb: [number, number, number];
  if (hp < 1) rgb = [c, x, 0];
  else if (hp < 2) rgb = [x, c, 0];
  else if (hp < 3) rgb = [0, c, x];
  else if (hp < 4) rgb = [0, x, c];
  else if (hp < 5) rgb = [x, 0, c];
  else rgb = [c, 0, x];
  const m = l - c / 2;
  return {
    r: Math.round((rgb[0] + m) * 255),
    g: Math.round((rgb[1] + m) * 255),
    b: Math.round((rgb[2] + m) * 255),
  };
}

export function promptColor(prompt: string): Rgb {
  const key = prompt.trim().toLowerCase();
  if (key === "background") return { r: 0, g: 0, b: 0 };
  const h = hashString(key);
  const hue = h % 360;
  const sat = 0.55 + ((h >>> 9) % 30) / 100;
  const light = 0.45 + ((h >>> 17) % 20) / 100;
  return hslToRgb(hue, sat, light);
}

export function cssColor(rgb: Rgb): string {
  return `rgb(${rgb.r}, ${rgb.g}, ${rgb.b})`;
}
