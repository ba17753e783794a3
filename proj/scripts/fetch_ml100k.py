#!/usr/bin/env python3
"""Export the MovieLens-100K ratings to data/ml-100k/u.data (tab separated).

GroupLens does not allow redistribution, so the ratings are not committed.
The pytorch-widedeep wheel ships the same 100000 ratings as a parquet file;
this script pulls that wheel through pip and writes them out in the original
"user item rating timestamp" layout.
"""
import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import zipfile

import pandas as pd

MEMBER = "pytorch_widedeep/datasets/data/MovieLens100k_data.parquet.brotli"


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/ml-100k/u.data")
    ap.add_argument("--wheel", help="use an already downloaded wheel")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel
        if wheel is None:
            subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps",
                            "-q", "pytorch-widedeep==1.7.0", "-d", tmp], check=True)
            wheel = next(pathlib.Path(tmp).glob("pytorch_widedeep-*.whl"))
        with zipfile.ZipFile(wheel) as z:
            df = pd.read_parquet(io.BytesIO(z.read(MEMBER)))

    df = df[["user_id", "movie_id", "rating", "timestamp"]]
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(out, sep="\t", header=False, index=False)
    print(f"wrote {len(df)} ratings to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
