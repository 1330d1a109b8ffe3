"""Discover README links, fetch documents, and assemble the resource corpus."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .config import Config
from .errors import EmptyCorpus, RepoPersonaError
from .hosting import HostingClient
from .htmltext import extract_text
from .model import RepositoryRef, ResourceCorpus, ResourceDocument
from .parsing import LinkPlan, PlannedLink
from .prompts import render_prompt
from .providers import Completer

CONTEXT_LOCATOR = "user:additional-context"


def discover_links(
    completer: Completer,
    readme: ResourceDocument,
    ref: RepositoryRef,
    *,
    job_id: str | None = None,
) -> LinkPlan:
    """Run the link-discovery stage over the README."""
    if readme.source_kind != "readme":
        raise RepoPersonaError("discover_links needs the readme document")
    bundle = render_prompt(
        "link_discovery",
        {"owner_repo": ref.full_name, "readme_text": readme.content_text},
    )
    plan = completer.complete_parsed(bundle, job_id=job_id)
    assert isinstance(plan, LinkPlan)
    return plan


def select_plan_links(plan: LinkPlan, max_links: int) -> list[PlannedLink]:
    """Top links across both lists by descending priority, ties in plan order."""
    ordered = list(plan.in_plan_order())
    ordered.sort(key=lambda link: -link.priority)  # stable: preserves plan order on ties
    return ordered[:max_links]


def fetch_plan_documents(
    client: HostingClient,
    ref: RepositoryRef,
    links: list[PlannedLink],
    *,
    fanout: int = 4,
) -> tuple[list[ResourceDocument], list[str]]:
    """Fetch selected links concurrently; failures become warnings, not errors."""

    def fetch_one(link: PlannedLink) -> ResourceDocument | str:
        try:
            if link.internal:
                resp = client.fetch_raw(ref, link.locator)
                text = resp.body
            else:
                resp = client.fetch_url(link.locator)
                text = extract_text(resp.body)
            if resp.status != 200:
                return f"failed to fetch {link.locator}: HTTP {resp.status}"
        except RepoPersonaError as exc:
            return f"failed to fetch {link.locator}: {exc}"
        return ResourceDocument(
            source_kind="internal_link" if link.internal else "external_link",
            locator=link.locator,
            content_text=text,
            expected_content=link.expected_content,
            user_relevance=link.user_relevance,
            priority=link.priority,
        )

    documents: list[ResourceDocument] = []
    warnings: list[str] = []
    if not links:
        return documents, warnings
    with ThreadPoolExecutor(max_workers=max(1, fanout)) as pool:
        for outcome in pool.map(fetch_one, links):
            if isinstance(outcome, str):
                warnings.append(outcome)
            else:
                documents.append(outcome)
    return documents, warnings


def fetch_user_docs(
    client: HostingClient, urls: list[str]
) -> tuple[list[ResourceDocument], list[str]]:
    """Fetch user-supplied documentation URLs; failures degrade to warnings."""
    documents: list[ResourceDocument] = []
    warnings: list[str] = []
    for url in urls:
        try:
            resp = client.fetch_url(url)
        except RepoPersonaError as exc:
            warnings.append(f"failed to fetch {url}: {exc}")
            continue
        if resp.status != 200:
            warnings.append(f"failed to fetch {url}: HTTP {resp.status}")
            continue
        documents.append(
            ResourceDocument(
                source_kind="user_provided",
                locator=url,
                content_text=extract_text(resp.body),
                priority=5,
            )
        )
    return documents, warnings


def context_document(text: str) -> ResourceDocument:
    """Wrap the free-form user context so it flows through the corpus like a doc."""
    return ResourceDocument(
        source_kind="user_provided",
        locator=CONTEXT_LOCATOR,
        content_text=text,
        priority=5,
    )


def build_corpus(
    ref: RepositoryRef,
    readme: ResourceDocument | None,
    plan_documents: list[ResourceDocument],
    user_docs: list[ResourceDocument],
    *,
    warnings: list[str] | None = None,
    config: Config | None = None,
) -> ResourceCorpus:
    """Assemble documents in canonical order and enforce the size caps.

    Order is readme, then user-provided docs, then fetched plan links by
    nonincreasing priority. Oversized documents are tail-truncated; once the
    corpus total is reached, later documents are dropped entirely.
    """
    config = config or Config()
    if readme is None and not user_docs:
        raise EmptyCorpus("no README and no user-provided documents")

    ordered: list[ResourceDocument] = []
    if readme is not None:
        ordered.append(readme)
    ordered.extend(user_docs)
    ordered.extend(sorted(plan_documents, key=lambda d: -d.priority))

    kept: list[ResourceDocument] = []
    collected_warnings = list(warnings or [])
    total = 0
    truncated = False
    for doc in ordered:
        text = doc.content_text
        cut = False
        if len(text) > config.per_document_chars:
            text = text[: config.per_document_chars]
            cut = True
        budget = config.corpus_total_chars - total
        if budget <= 0:
            truncated = True
            collected_warnings.append(f"dropped {doc.locator}: corpus size cap reached")
            continue
        if len(text) > budget:
            text = text[:budget]
            cut = True
        total += len(text)
        truncated = truncated or cut
        if not cut:
            kept.append(doc)
        else:
            kept.append(
                ResourceDocument(
                    source_kind=doc.source_kind,
                    locator=doc.locator,
                    content_text=text,
                    expected_content=doc.expected_content,
                    user_relevance=doc.user_relevance,
                    priority=doc.priority,
                    fetched_at=doc.fetched_at,
                )
            )
    if total == 0:
        raise EmptyCorpus("all candidate documents were empty")
    return ResourceCorpus(
        repo=ref,
        documents=tuple(kept),
        total_chars=total,
        truncated=truncated,
        warnings=tuple(collected_warnings),
    )
