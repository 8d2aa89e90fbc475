import { existsSync, readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

const HERE = dirname(fileURLToPath(import.meta.url));
const DIST = join(HERE, "..", "dist", "repairlab-capture.js");

// Minimal page double, enough for the standalone walker.
function fakePage() {
  const li = {
    tagName: "LI",
    id: "",
    className: "item",
    children: [],
    getBoundingClientRect: () => ({ left: 40, top: 48, width: 160, height: 24 }),
  };
  const root = {
    tagName: "HTML",
    id: "",
    className: "",
    children: [li],
    getBoundingClientRect: () => ({ left: 0, top: 0, width: 800, height: 600 }),
  };
  return {
    documentElement: root,
    location: { href: "fixture://standalone" },
    defaultView: { scrollTo: () => undefined },
    querySelector: () => null,
  };
}

describe("dist/repairlab-capture.js", () => {
  it.skipIf(!existsSync(DIST))("registers a working global capture entry point", () => {
    const source = readFileSync(DIST, "utf8");
    const sandbox: Record<string, unknown> = { console: { log: () => undefined } };
    const run = new Function(
      "globalThis",
      `${source}\nreturn globalThis.repairlabCapture;`,
    );
    const captureFn = run(sandbox) as (options?: unknown) => string;
    expect(typeof captureFn).toBe("function");
    sandbox.document = fakePage();
    const text = captureFn();
    const parsed = JSON.parse(text);
    expect(parsed.meta.url).toBe("fixture://standalone");
    expect(parsed.root.tag).toBe("html");
    expect(parsed.root.children[0]).toMatchObject({
      tag: "li",
      classes: ["item"],
      box: { left: 40, top: 48, width: 160, height: 24 },
    });
  });
});
