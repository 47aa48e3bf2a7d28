"""``python -m regshacl.corpus update`` rewrites the golden reports."""

import argparse

from . import update_goldens


def main() -> None:
    parser = argparse.ArgumentParser(prog="python -m regshacl.corpus")
    parser.add_argument("action", choices=["update"])
    parser.parse_args()
    for p in update_goldens():
        print(f"wrote {p}")


if __name__ == "__main__":
    main()
