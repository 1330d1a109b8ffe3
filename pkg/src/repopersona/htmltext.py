"""Visible-text extraction for crawled pages, no JS rendering.

Strips markup and boilerplate with a block-level link-density heuristic:
navigation and chrome blocks are mostly anchor text, prose blocks are not.
"""

from __future__ import annotations

from html.parser import HTMLParser

_SKIP_SUBTREES = {"script", "style", "noscript", "nav", "header", "footer", "aside", "svg", "template"}
_BLOCK_TAGS = {
    "p", "div", "li", "section", "article", "main", "td", "blockquote", "pre",
    "h1", "h2", "h3", "h4", "h5", "h6", "body",
}

MIN_BLOCK_CHARS = 20
MAX_LINK_DENSITY = 0.5


class _BlockCollector(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.blocks: list[tuple[str, int]] = []  # (text, chars inside <a>)
        self._skip_depth = 0
        self._anchor_depth = 0
        self._text: list[str] = []
        self._link_chars = 0
        self.saw_tag = False

    def _flush(self) -> None:
        text = " ".join("".join(self._text).split())
        if text:
            self.blocks.append((text, self._link_chars))
        self._text = []
        self._link_chars = 0

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        self.saw_tag = True
        if tag in _SKIP_SUBTREES:
            self._skip_depth += 1
            return
        if tag == "a":
            self._anchor_depth += 1
        if tag in _BLOCK_TAGS:
            self._flush()

    def handle_endtag(self, tag: str) -> None:
        if tag in _SKIP_SUBTREES:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if tag == "a":
            self._anchor_depth = max(0, self._anchor_depth - 1)
        if tag in _BLOCK_TAGS:
            self._flush()

    def handle_data(self, data: str) -> None:
        if self._skip_depth:
            return
        self._text.append(data)
        if self._anchor_depth:
            self._link_chars += len(data.strip())


def extract_text(content: str) -> str:
    """Readable text of an HTML page; non-HTML content passes through."""
    collector = _BlockCollector()
    try:
        collector.feed(content)
        collector.close()
    except Exception:
        return content
    collector._flush()
    if not collector.saw_tag:
        return content
    kept = []
    for text, link_chars in collector.blocks:
        if len(text) < MIN_BLOCK_CHARS:
            continue
        if link_chars / max(1, len(text)) > MAX_LINK_DENSITY:
            continue
        kept.append(text)
    return "\n".join(kept)
