/** 5x7 bitmap glyphs for axis labels; each glyph is 7 rows of 5-bit masks. */

const GLYPHS: Record<string, number[]> = {
  "0": [0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e],
  "1": [0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e],
  "2": [0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f],
  "3": [0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e],
  "4": [0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02],
  "5": [0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e],
  "6": [0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e],
  "7": [0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
  "8": [0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e],
  "9": [0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c],
  "-": [0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00],
  "+": [0x00, 0x04, 0x04, 0x1f, 0x04, 0x04, 0x00],
  ".": [0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c],
  ",": [0x00, 0x00, 0x00, 0x00, 0x0c, 0x04, 0x08],
  ":": [0x00, 0x0c, 0x0c, 0x00, 0x0c, 0x0c, 0x00],
  "=": [0x00, 0x00, 0x1f, 0x00, 0x1f, 0x00, 0x00],
  "(": [0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02],
  ")": [0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08],
  "/": [0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10],
  "|": [0x04, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
  "*": [0x00, 0x0a, 0x04, 0x1f, 0x04, 0x0a, 0x00],
  "e": [0x00, 0x00, 0x0e, 0x11, 0x1f, 0x10, 0x0e],
  "a": [0x00, 0x00, 0x0e, 0x01, 0x0f, 0x11, 0x0f],
  "b": [0x10, 0x10, 0x1e, 0x11, 0x11, 0x11, 0x1e],
  "c": [0x00, 0x00, 0x0e, 0x10, 0x10, 0x11, 0x0e],
  "d": [0x01, 0x01, 0x0f, 0x11, 0x11, 0x11, 0x0f],
  "f": [0x06, 0x08, 0x1c, 0x08, 0x08, 0x08, 0x08],
  "g": [0x00, 0x0f, 0x11, 0x11, 0x0f, 0x01, 0x0e],
  "h": [0x10, 0x10, 0x1e, 0x11, 0x11, 0x11, 0x11],
  "i": [0x04, 0x00, 0x0c, 0x04, 0x04, 0x04, 0x0e],
  "j": [0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0c],
  "k": [0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12],
  "l": [0x0c, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e],
  "m": [0x00, 0x00, 0x1a, 0x15, 0x15, 0x15, 0x15],
  "n": [0x00, 0x00, 0x1e, 0x11, 0x11, 0x11, 0x11],
  "o": [0x00, 0x00, 0x0e, 0x11, 0x11, 0x11, 0x0e],
  "p": [0x00, 0x1e, 0x11, 0x11, 0x1e, 0x10, 0x10],
  "q": [0x00, 0x0f, 0x11, 0x11, 0x0f, 0x01, 0x01],
  "r": [0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10],
  "s": [0x00, 0x00, 0x0f, 0x10, 0x0e, 0x01, 0x1e],
  "t": [0x08, 0x08, 0x1c, 0x08, 0x08, 0x09, 0x06],
  "u": [0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0d],
  "v": [0x00, 0x00, 0x11, 0x11, 0x11, 0x0a, 0x04],
  "w": [0x00, 0x00, 0x15, 0x15, 0x15, 0x15, 0x0a],
  "x": [0x00, 0x00, 0x11, 0x0a, 0x04, 0x0a, 0x11],
  "y": [0x00, 0x11, 0x11, 0x0f, 0x01, 0x11, 0x0e],
  "z": [0x00, 0x00, 0x1f, 0x02, 0x04, 0x08, 0x1f],
  "E": [0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x1f],
  "T": [0x1f, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
  "D": [0x1e, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1e],
  "Q": [0x0e, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0d],
  "M": [0x11, 0x1b, 0x15, 0x15, 0x11, 0x11, 0x11],
  "C": [0x0e, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0e],
  " ": [0, 0, 0, 0, 0, 0, 0],
};

export const GLYPH_W = 5;
export const GLYPH_H = 7;

export function glyphFor(ch: string): number[] {
  return GLYPHS[ch] ?? GLYPHS[ch.toLowerCase()] ?? GLYPHS["."];
}
