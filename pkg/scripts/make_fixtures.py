"""Regenerate fixtures/: query files and small streams with planted instances."""

from __future__ import annotations

import random
from pathlib import Path

from graphwatch.query import serialize_query
from graphwatch.streamio import write_edges
from graphwatch.synth import StreamBuilder, article_query, corpus_queries, make_query, random_stream

ROOT = Path(__file__).resolve().parents[1] / "fixtures"


def cyber_queries() -> list:
    return [
        make_query(
            "smurf_amplification",
            [
                ("attacker", "icmp_echo", "amp1"),
                ("attacker", "icmp_echo", "amp2"),
                ("amp1", "icmp_reply", "victim"),
                ("amp2", "icmp_reply", "victim"),
            ],
            2_000,
            {"attacker": "Host", "amp1": "Host", "amp2": "Host", "victim": "Host"},
        ),
        make_query(
            "lateral_movement",
            [("user", "login", "h1"), ("h1", "connects", "h2"), ("h2", "connects", "h3")],
            5_000,
            {"user": "User", "h1": "Host", "h2": "Host", "h3": "Host"},
        ),
        make_query(
            "staged_exfiltration",
            [("h", "connects", "db"), ("h", "connects", "ext"), ("user", "login", "h")],
            3_000,
            {"h": "Host", "db": "Server", "ext": "External", "user": "User"},
        ),
    ]


def cyber_stream(seed: int, queries: list) -> list:
    rng = random.Random(seed)
    builder = StreamBuilder(rng, 60, vertex_types=("Host", "Host", "Host", "Server", "User", "External"))
    t = 1_000_000
    for _ in range(240):
        t += rng.randint(0, 40)
        builder.random_edge(t, ("connects", "connects", "login", "icmp_echo", "icmp_reply"))
    for q in queries:
        for _ in range(2):
            builder.plant(q, rng.randint(1_000_000, t), 500)
    return builder.build()


def news_stream(seed: int) -> list:
    rng = random.Random(seed)
    builder = StreamBuilder(rng, 0)
    articles = [f"article{i}" for i in range(30)]
    keywords = [f"kw_{w}" for w in ("politics", "accident", "storm", "election")]
    places = [f"loc_{p}" for p in ("nyc", "boston", "dc")]
    builder.vertex_type.update({a: "Article" for a in articles})
    builder.vertex_type.update({k: "Keyword" for k in keywords})
    builder.vertex_type.update({p: "Location" for p in places})
    t = 0
    for a in articles:
        t += rng.randint(0, 4_000)
        builder.add(t, a, "mentions", rng.choice(keywords))
        builder.add(t + rng.randint(0, 500), a, "located_in", rng.choice(places))
    return builder.build()


def main() -> None:
    (ROOT / "queries").mkdir(parents=True, exist_ok=True)
    (ROOT / "streams").mkdir(parents=True, exist_ok=True)
    corpus = corpus_queries(200)
    for q in corpus + cyber_queries() + [article_query(20_000)]:
        (ROOT / "queries" / f"{q.name}.json").write_text(serialize_query(q), encoding="utf-8")
    with open(ROOT / "streams" / "synthetic.jsonl", "w", encoding="utf-8") as fh:
        write_edges(random_stream(2013, n_edges=300, plant=corpus), fh)
    with open(ROOT / "streams" / "cyber.jsonl", "w", encoding="utf-8") as fh:
        write_edges(cyber_stream(7, cyber_queries()), fh)
    with open(ROOT / "streams" / "news.jsonl", "w", encoding="utf-8") as fh:
        write_edges(news_stream(11), fh)


if __name__ == "__main__":
    main()
