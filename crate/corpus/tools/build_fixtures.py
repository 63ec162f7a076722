#!/usr/bin/env python3
"""Regenerate layout.ndjson and annotations.json for the fixture corpus.

Each page.html is hand-written, well-formed HTML. Annotations come from
`data-seg` attributes: every text-bearing element takes the id of its nearest
ancestor-or-self carrying one, and elements without such an ancestor are
background. Layout is a simple deterministic flow model (blocks stack, inline
elements fill lines, `.row` containers and table rows split their width
evenly) standing in for a rendered 1280px viewport.

Usage: python3 corpus/tools/build_fixtures.py [corpus_dir]
"""

import json
import math
import sys
from html.parser import HTMLParser
from pathlib import Path

VOID = {"area", "base", "br", "col", "embed", "hr", "img", "input", "link",
        "meta", "source", "track", "wbr", "param"}
HIDDEN_TEXT = {"script", "style", "template", "noscript"}
NO_BOX = {"script", "style", "template", "noscript", "option"}
INLINE = {"a", "span", "b", "strong", "em", "i", "small", "code", "time",
          "cite", "label", "button", "select", "input", "img"}
VIEWPORT = 1280.0
CHAR_W = 7.0
LINE_H = 20.0
HEADING_H = {"h1": 36.0, "h2": 28.0, "h3": 24.0}


class Node:
    def __init__(self, tag, attrs, parent):
        self.tag = tag
        self.attrs = dict(attrs)
        self.parent = parent
        self.children = []
        self.box = (0.0, 0.0, 0.0, 0.0)

    def text(self):
        return " ".join("".join(c for c in self.children if isinstance(c, str)).split())

    def elements(self):
        return [c for c in self.children if isinstance(c, Node)]


class TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = None
        self.stack = []

    def handle_starttag(self, tag, attrs):
        parent = self.stack[-1] if self.stack else None
        node = Node(tag, attrs, parent)
        if parent is None:
            self.root = node
        else:
            parent.children.append(node)
        if tag not in VOID:
            self.stack.append(node)

    def handle_endtag(self, tag):
        if tag in VOID:
            return
        if self.stack[-1].tag != tag:
            raise ValueError(f"unbalanced </{tag}> inside <{self.stack[-1].tag}>")
        self.stack.pop()

    def handle_data(self, data):
        if self.stack:
            self.stack[-1].children.append(data)


def hidden(node):
    while node is not None:
        if node.tag in HIDDEN_TEXT:
            return True
        node = node.parent
    return False


def preorder(root):
    """Element pre-order, skipping the head subtree like the parser does."""
    out, stack = [], [root]
    while stack:
        node = stack.pop()
        if node.tag == "head":
            continue
        out.append(node)
        stack.extend(reversed(node.elements()))
    return out


def inline_width(node):
    if node.tag == "img":
        return 160.0
    if node.tag == "input":
        return 180.0
    chars = len(node.text()) + sum(len(c.text()) for c in node.elements())
    return max(chars * CHAR_W, CHAR_W) + (16.0 if node.tag in ("button", "select") else 0.0)


def inline_height(node):
    return 120.0 if node.tag == "img" else LINE_H


def layout_inline(node, x, y):
    w, h = inline_width(node), inline_height(node)
    node.box = (x, y, w, h)
    cx = x
    for child in node.elements():
        if child.tag in NO_BOX:
            child.box = (cx, y, 0.0, 0.0)
            zero_subtree(child)
            continue
        layout_inline(child, cx, y)
        cx += child.box[2]


def zero_subtree(node):
    for child in node.elements():
        child.box = (node.box[0], node.box[1], 0.0, 0.0)
        zero_subtree(child)


def layout_columns(node, x, y, w, kids):
    col_w = w / max(len(kids), 1)
    tallest = 0.0
    for k, child in enumerate(kids):
        tallest = max(tallest, layout_block(child, x + k * col_w, y, col_w))
    return tallest


def layout_block(node, x, y, w):
    """Lays out `node` as a block at (x, y) with width w; returns its height."""
    if node.tag in NO_BOX:
        node.box = (x, y, 0.0, 0.0)
        zero_subtree(node)
        return 0.0
    line_h = HEADING_H.get(node.tag, LINE_H)
    kids = node.elements()
    if node.tag == "tr" or "row" in node.attrs.get("class", "").split():
        h = layout_columns(node, x, y, w, kids)
        node.box = (x, y, w, h)
        return h

    cy, cx, line_used = y, x, 0.0
    line_max = 0.0

    def newline():
        nonlocal cy, cx, line_used, line_max
        if line_used:
            cy += max(line_max, line_h)
        cx, line_used, line_max = x, 0.0, 0.0

    text = node.text() if not hidden(node) else ""
    if text:
        tw = len(text) * CHAR_W
        lines = max(1, math.ceil(tw / w))
        if lines > 1:
            cy += (lines - 1) * line_h
            tw = tw - (lines - 1) * w
        cx, line_used, line_max = x + tw, tw, line_h
    for child in kids:
        if child.tag in INLINE:
            cw = inline_width(child)
            if line_used and cx + cw > x + w:
                newline()
            layout_inline(child, cx, cy)
            cx += child.box[2]
            line_used += child.box[2]
            line_max = max(line_max, child.box[3])
        else:
            newline()
            cy += layout_block(child, x, cy, w)
    newline()
    h = cy - y
    if node.tag in ("p", "ul", "ol", "dl", "h1", "h2", "h3", "blockquote", "figure", "pre"):
        h += 8.0
    node.box = (x, y, w, h)
    return h


def build(page_dir):
    source = (page_dir / "page.html").read_text(encoding="utf-8")
    builder = TreeBuilder()
    builder.feed(source)
    root = builder.root
    body = next(c for c in root.elements() if c.tag == "body")
    root_h = layout_block(body, 8.0, 8.0, VIEWPORT - 16.0) + 16.0
    root.box = (0.0, 0.0, VIEWPORT, root_h)

    nodes = preorder(root)
    records, truth = [], {}
    for i, node in enumerate(nodes):
        x, y, w, h = node.box
        records.append({"i": i, "t": node.tag, "x": round(x, 2), "y": round(y, 2),
                        "w": round(w, 2), "h": round(h, 2)})
        if node.text() and not hidden(node):
            owner = node
            while owner is not None and "data-seg" not in owner.attrs:
                owner = owner.parent
            if owner is not None:
                truth[str(i)] = owner.attrs["data-seg"]
    with open(page_dir / "layout.ndjson", "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")
    with open(page_dir / "annotations.json", "w", encoding="utf-8") as f:
        json.dump(truth, f, indent=2)
        f.write("\n")
    return len(records), len(truth)


def main():
    corpus = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1]
    for page_dir in sorted(p for p in corpus.iterdir() if (p / "page.html").is_file()):
        n, annotated = build(page_dir)
        print(f"{page_dir.name}: {n} elements, {annotated} annotated")


if __name__ == "__main__":
    main()
