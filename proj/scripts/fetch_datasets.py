#!/usr/bin/env python3
"""Writes the benchmark datasets to data/*.csv (header row, label column last).

The `cf` binary never touches the network; this script is the only place that
knows where the files come from.

Original sources (UCI Machine Learning Repository):
  soybean  https://archive.ics.uci.edu/dataset/91/soybean+small   (47 x 35, 4 classes)
  wine     https://archive.ics.uci.edu/dataset/109/wine           (178 x 13, 3 classes)
  wdbc     https://archive.ics.uci.edu/dataset/17                 (569 x 30, 2 classes)
  heart    https://archive.ics.uci.edu/dataset/145/statlog+heart  (270 x 13, 2 classes)
  segment  https://archive.ics.uci.edu/dataset/50/image+segmentation (7 classes)

Offline fallbacks, tried in order when UCI is unreachable:
  wine, wdbc      copies bundled with scikit-learn
  heart, segment  the KEEL copies shipped in the `keel_ds` wheel (pip download keel_ds)

The KEEL segment file holds all 2310 rows (UCI train + test); the UCI
"segmentation.data" 210 rows and "segmentation.test" 2100 rows are also accepted.
Soybean-small has no offline copy; place soybean-small.data from UCI in data/
(or pass --soybean PATH) and rerun.
"""

import argparse
import csv
import glob
import io
import os
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases/"


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path}: {len(rows)} rows, {len(header) - 1} features")


def fetch(url):
    try:
        with urllib.request.urlopen(url, timeout=20) as r:
            return r.read().decode()
    except Exception as e:  # noqa: BLE001
        print(f"  {url}: {e}", file=sys.stderr)
        return None


def numeric(v):
    f = float(v)
    return str(int(f)) if f.is_integer() else repr(f)


def sklearn_csv(name):
    import sklearn

    path = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data", name)
    with open(path) as f:
        lines = f.read().splitlines()
    # First line is "n,p,class names..."
    return [ln.split(",") for ln in lines[1:] if ln]


def keel_rows(member):
    wheels = glob.glob(os.path.join(tempfile.gettempdir(), "keel_ds", "keel_ds-*.whl"))
    if not wheels:
        dest = os.path.join(tempfile.gettempdir(), "keel_ds")
        subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-d", dest, "keel_ds"], check=True)
        wheels = glob.glob(os.path.join(dest, "keel_ds-*.whl"))
    with zipfile.ZipFile(wheels[0]) as z:
        text = z.read(f"keel_ds/data/balanced/raw/{member}").decode()
    return [ln.split(",") for ln in text.splitlines() if ln.strip() and not ln.startswith("@")]


def wine(out):
    text = fetch(UCI + "wine/wine.data")
    if text:
        rows = [r[1:] + [r[0]] for r in csv.reader(io.StringIO(text)) if r]
    else:
        rows = sklearn_csv("wine_data.csv")
    write_csv(out, [f"x{i}" for i in range(13)] + ["class"], [[numeric(v) for v in r[:-1]] + [r[-1]] for r in rows])


def wdbc(out):
    text = fetch(UCI + "breast-cancer-wisconsin/wdbc.data")
    if text:
        rows = [r[2:] + [r[1]] for r in csv.reader(io.StringIO(text)) if r]
    else:
        rows = sklearn_csv("breast_cancer.csv")
    write_csv(out, [f"x{i}" for i in range(30)] + ["class"], [[numeric(v) for v in r[:-1]] + [r[-1]] for r in rows])


def heart(out):
    text = fetch(UCI + "statlog/heart/heart.dat")
    if text:
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    else:
        rows = keel_rows("heart.dat")
    write_csv(out, [f"x{i}" for i in range(13)] + ["class"], [[numeric(v) for v in r[:-1]] + [r[-1].strip()] for r in rows])


def segment(out):
    text = fetch(UCI + "image/segmentation.test")
    if text:
        lines = [ln for ln in text.splitlines() if ln and ln[0].isupper() and "," in ln]
        rows = [r[1:] + [r[0]] for r in csv.reader(lines)][1:] if lines and lines[0].startswith("REGION") else \
            [r[1:] + [r[0]] for r in csv.reader(lines)]
    else:
        rows = keel_rows("segment.dat")
    write_csv(out, [f"x{i}" for i in range(19)] + ["class"], [[numeric(v) for v in r[:-1]] + [r[-1].strip()] for r in rows])


def soybean(out, path):
    text = None
    if path and os.path.exists(path):
        with open(path) as f:
            text = f.read()
    if text is None:
        text = fetch(UCI + "soybean/soybean-small.data")
    if text is None:
        print("soybean: no source available; skipped", file=sys.stderr)
        return
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    write_csv(out, [f"x{i}" for i in range(35)] + ["class"], rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--soybean", help="local copy of soybean-small.data")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    wine(os.path.join(args.out, "wine.csv"))
    wdbc(os.path.join(args.out, "wdbc.csv"))
    heart(os.path.join(args.out, "heart.csv"))
    segment(os.path.join(args.out, "segment.csv"))
    local = args.soybean or os.path.join(args.out, "soybean-small.data")
    soybean(os.path.join(args.out, "soybean.csv"), local)


if __name__ == "__main__":
    main()
