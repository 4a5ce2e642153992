#!/usr/bin/env python3
"""Convert public text classification corpora to the vlawe TSV layout.

    doc_id<TAB>label[,label...]<TAB>train|test|-<TAB>text

Supported inputs:

  mr       rt-polarity.pos and rt-polarity.neg (sentence polarity v1.0)
  subj     quote.tok.gt9.5000 (subjective) and plot.tok.gt9.5000 (objective)
  trec     train_5500.label and TREC_10.label
  rt2k     txt_sentoken/ directory with pos/ and neg/ (polarity v2.0)
  reuters  directory of reut2-*.sgm files; ModApte split

Usage:

  convert_corpora.py mr DIR OUT.tsv
"""

import argparse
import html
import re
import sys
from pathlib import Path


def clean(text):
    return " ".join(text.replace("\t", " ").split())


def read_lines(path):
    # the sentence polarity files are Latin-1
    return path.read_bytes().decode("latin-1").splitlines()


def convert_mr(src):
    rows = []
    for label, name in (("pos", "rt-polarity.pos"), ("neg", "rt-polarity.neg")):
        for i, line in enumerate(read_lines(src / name)):
            if line.strip():
                rows.append((f"mr-{label}-{i}", [label], "-", clean(line)))
    return rows


def convert_subj(src):
    rows = []
    for label, name in (("subjective", "quote.tok.gt9.5000"), ("objective", "plot.tok.gt9.5000")):
        for i, line in enumerate(read_lines(src / name)):
            if line.strip():
                rows.append((f"subj-{label}-{i}", [label], "-", clean(line)))
    return rows


def convert_trec(src):
    rows = []
    for split, name in (("train", "train_5500.label"), ("test", "TREC_10.label")):
        for i, line in enumerate(read_lines(src / name)):
            if not line.strip():
                continue
            fine, text = line.split(" ", 1)
            coarse = fine.split(":", 1)[0]
            rows.append((f"trec-{split}-{i}", [coarse], split, clean(text)))
    return rows


def convert_rt2k(src):
    rows = []
    for label in ("pos", "neg"):
        for f in sorted((src / label).glob("*.txt")):
            text = f.read_text(encoding="latin-1")
            rows.append((f"rt2k-{label}-{f.stem}", [label], "-", clean(text)))
    return rows


REUTER = re.compile(r"<REUTERS(.*?)>(.*?)</REUTERS>", re.S)
ATTR = re.compile(r'(\w+)="([^"]*)"')
TOPICS = re.compile(r"<TOPICS>(.*?)</TOPICS>", re.S)
D = re.compile(r"<D>(.*?)</D>", re.S)
TITLE = re.compile(r"<TITLE>(.*?)</TITLE>", re.S)
BODY = re.compile(r"<BODY>(.*?)</BODY>", re.S)


def convert_reuters(src):
    docs = []
    for f in sorted(src.glob("reut2-*.sgm")):
        raw = f.read_bytes().decode("latin-1")
        for attrs, inner in REUTER.findall(raw):
            a = dict(ATTR.findall(attrs))
            if a.get("TOPICS") != "YES" or a.get("LEWISSPLIT") not in ("TRAIN", "TEST"):
                continue
            t = TOPICS.search(inner)
            topics = D.findall(t.group(1)) if t else []
            title = TITLE.search(inner)
            body = BODY.search(inner)
            text = " ".join(html.unescape(m.group(1)) for m in (title, body) if m)
            split = "train" if a["LEWISSPLIT"] == "TRAIN" else "test"
            docs.append((a["NEWID"], topics, split, clean(text)))

    # keep the categories with at least one training and one test document
    seen = {"train": set(), "test": set()}
    for _, topics, split, _ in docs:
        seen[split].update(topics)
    keep = seen["train"] & seen["test"]
    rows = []
    for newid, topics, split, text in docs:
        labels = sorted(t for t in topics if t in keep)
        if labels and text:
            rows.append((f"reuters-{newid}", labels, split, text))
    return rows


CONVERTERS = {
    "mr": convert_mr,
    "subj": convert_subj,
    "trec": convert_trec,
    "rt2k": convert_rt2k,
    "reuters": convert_reuters,
}


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("corpus", choices=sorted(CONVERTERS))
    p.add_argument("source", type=Path, help="directory holding the original files")
    p.add_argument("out", type=Path)
    args = p.parse_args()

    rows = CONVERTERS[args.corpus](args.source)
    with args.out.open("w", encoding="utf-8", newline="\n") as out:
        for doc_id, labels, split, text in rows:
            out.write(f"{doc_id}\t{','.join(labels)}\t{split}\t{text}\n")
    splits = {}
    for r in rows:
        splits[r[2]] = splits.get(r[2], 0) + 1
    summary = ", ".join(f"{k}={v}" for k, v in sorted(splits.items()))
    print(f"{args.out}: {len(rows)} documents ({summary})", file=sys.stderr)


if __name__ == "__main__":
    main()
