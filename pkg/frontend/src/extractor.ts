/**
 * Serializes a rendered page (or a scoped subtree) into the snapshot JSON
 * consumed by the repairlab layout checker.
 *
 * The module is dependency-free and structural: anything shaped like a DOM
 * element (tagName, children, getBoundingClientRect) can be captured, which
 * keeps the walker testable outside a browser.  `npm run build` emits
 * dist/repairlab-capture.js, a standalone script pasteable into a browser
 * console; it registers `repairlabCapture()` on globalThis.
 */

interface RectLike {
  left: number;
  top: number;
  width: number;
  height: number;
}

interface ElementLike {
  tagName: string;
  id?: string;
  classList?: Iterable<string> | ArrayLike<string>;
  className?: string;
  children: ArrayLike<ElementLike> | Iterable<ElementLike>;
  getBoundingClientRect(): RectLike;
}

interface DocumentLike {
  documentElement: ElementLike;
  querySelector?(selector: string): ElementLike | null;
  location?: { href: string };
  defaultView?: { scrollTo?(x: number, y: number): void } | null;
}

interface CaptureOptions {
  /** CSS selector narrowing the capture to one subtree (default: the
   * document root). */
  scope?: string;
  /** Round fractional pixel values half-up (default).  When disabled,
   * values are truncated toward zero; the output is integer either way. */
  roundHalfUp?: boolean;
}

interface SnapshotNode {
  tag: string;
  id?: string;
  classes: string[];
  box: RectLike;
  text?: string;
  children: SnapshotNode[];
}

interface SnapshotDocument {
  meta: { url?: string; captured_at?: string; warning?: string };
  root: SnapshotNode;
}

function isDocument(value: DocumentLike | ElementLike): value is DocumentLike {
  return (value as DocumentLike).documentElement !== undefined;
}

function classesOf(element: ElementLike): string[] {
  if (element.classList) {
    const out: string[] = [];
    const list = element.classList as ArrayLike<string> & Iterable<string>;
    if (typeof (list as Iterable<string>)[Symbol.iterator] === "function") {
      for (const cls of list as Iterable<string>) out.push(cls);
      return out;
    }
    for (let i = 0; i < list.length; i += 1) out.push(list[i]);
    return out;
  }
  if (element.className) {
    return element.className.split(/\s+/).filter((c) => c.length > 0);
  }
  return [];
}

function childElements(element: ElementLike): ElementLike[] {
  const children = element.children as ArrayLike<ElementLike> &
    Iterable<ElementLike>;
  if (typeof (children as Iterable<ElementLike>)[Symbol.iterator] === "function") {
    return Array.from(children as Iterable<ElementLike>);
  }
  const out: ElementLike[] = [];
  for (let i = 0; i < children.length; i += 1) out.push(children[i]);
  return out;
}

function buildNode(
  element: ElementLike,
  round: (value: number) => number,
  withChildren: boolean,
): SnapshotNode {
  const rect = element.getBoundingClientRect();
  const node: SnapshotNode = {
    tag: element.tagName.toLowerCase(),
    classes: classesOf(element),
    box: {
      left: round(rect.left),
      top: round(rect.top),
      width: round(rect.width),
      height: round(rect.height),
    },
    children: [],
  };
  if (element.id) {
    node.id = element.id;
  }
  if (withChildren) {
    // .children holds element nodes only, so text and comment nodes are
    // omitted by construction; document order is preserved.
    node.children = childElements(element).map((child) =>
      buildNode(child, round, true),
    );
  }
  return node;
}

export function captureSnapshot(
  root: DocumentLike | ElementLike,
  options: CaptureOptions = {},
): SnapshotDocument {
  const roundHalfUp = options.roundHalfUp !== false;
  const round = roundHalfUp
    ? (value: number) => Math.round(value)
    : (value: number) => Math.trunc(value);

  const meta: SnapshotDocument["meta"] = {};
  let start: ElementLike;
  if (isDocument(root)) {
    // Coordinates are viewport-relative; zero the scroll first so they
    // coincide with page coordinates.
    root.defaultView?.scrollTo?.(0, 0);
    if (root.location?.href) {
      meta.url = root.location.href;
    }
    if (options.scope) {
      const scoped = root.querySelector?.(options.scope) ?? null;
      if (scoped === null) {
        meta.warning = `scope selector ${JSON.stringify(options.scope)} matched nothing`;
        return { meta, root: buildNode(root.documentElement, round, false) };
      }
      start = scoped;
    } else {
      start = root.documentElement;
    }
  } else {
    start = root;
  }
  return { meta, root: buildNode(start, round, true) };
}

/** Capture and serialize in one step; the result is snapshot JSON text. */
export function capture(
  root: DocumentLike | ElementLike,
  options: CaptureOptions = {},
): string {
  return JSON.stringify(captureSnapshot(root, options), null, 2) + "\n";
}

/** Console entry point: captures the page the script runs in. */
export function captureCurrentPage(options: CaptureOptions = {}): string {
  const doc = (globalThis as { document?: DocumentLike }).document;
  if (!doc) {
    throw new Error("captureCurrentPage needs a browser document");
  }
  return capture(doc, options);
}

export type { CaptureOptions, DocumentLike, ElementLike, RectLike, SnapshotDocument, SnapshotNode };
