import argparse
import gzip
import json
import sys

from utils.data_loaders import load_queries
from utils.errors import FairRankError
from utils.file_io import open_text


def extract_corpus(input_files, queries_file: str, output_file: str):
    """
    Keep only the corpus records referenced by the query pools.

    Streams one or more S2 corpus chunks (plain or gzip JSON-lines) and writes
    the matching records unchanged, one per line. Output is gzip-compressed
    when the output name ends in .gz.
    """
    wanted = set()
    for request in load_queries(queries_file):
        wanted.update(request.pool)
    print(f"Looking for {len(wanted)} pool documents")

    found = set()
    opener = gzip.open if output_file.endswith('.gz') else open
    with opener(output_file, 'wt', encoding='utf-8') as outfile:
        for input_file in input_files:
            kept = 0
            with open_text(input_file) as infile:
                for line_num, line in enumerate(infile, 1):
                    if not line.strip():
                        continue
                    try:
                        data = json.loads(line)
                    except json.JSONDecodeError:
                        print(f"Warning: Skipping invalid JSON at {input_file}:{line_num}")
                        continue

                    doc_id = str(data.get("id", ""))
                    if doc_id in wanted and doc_id not in found:
                        outfile.write(json.dumps(data) + '\n')
                        found.add(doc_id)
                        kept += 1
            print(f"{input_file}: kept {kept} records")

    missing = len(wanted) - len(found)
    print(f"Extraction complete. {len(found)} documents written to {output_file}")
    if missing:
        print(f"Warning: {missing} pool documents were not found in the corpus")
    return len(found), missing


if __name__ == "__main__":
    parser = argparse.ArgumentParser(
        description="Subset S2 corpus chunks to the documents in a query file's reranking pools",
        epilog="Example: python extract_corpus.py --input s2-corpus-000.gz s2-corpus-001.gz "
               "--queries ../config/fixture/queries.jsonl --output corpus-subset.jsonl.gz"
    )

    parser.add_argument('--input', nargs='+', required=True, help='Corpus chunk files (JSON-lines, plain or gzip)')
    parser.add_argument('--queries', required=True, help='Query JSON-lines file whose pools select documents')
    parser.add_argument('--output', required=True, help='Output JSON-lines file (.gz to compress)')

    args = parser.parse_args()

    try:
        extract_corpus(args.input, args.queries, args.output)
    except FairRankError as e:
        print(f"✗ {e}")
        sys.exit(e.exit_code)
