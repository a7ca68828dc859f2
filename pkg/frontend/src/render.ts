import { existsSync } from "node:fs";
import { Resvg } from "@resvg/resvg-js";

// Pinning one font file keeps renders byte-stable on a given machine;
// system font discovery would make output depend on installation order.
const FONT_CANDIDATES = [
  "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
  "/usr/share/fonts/TTF/DejaVuSans.ttf",
  "/usr/share/fonts/dejavu/DejaVuSans.ttf",
];

export function svgToPng(svg: string): Buffer {
  const fontFile = FONT_CANDIDATES.find((p) => existsSync(p));
  const resvg = new Resvg(svg, {
    font: fontFile
      ? { loadSystemFonts: false, fontFiles: [fontFile], defaultFontFamily: "DejaVu Sans" }
      : { loadSystemFonts: true },
    background: "white",
  });
  return Buffer.from(resvg.render().asPng());
}
