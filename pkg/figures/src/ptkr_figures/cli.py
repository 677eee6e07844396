"""make-figures: render ptkr CSV output to image files.

    make-figures --recipe FILE [--recipe FILE]... [--out DIR]

Exit codes: 0 success, 2 recipe/input error.
"""

from __future__ import annotations

import argparse
import sys

from ptkr_figures.recipes import RecipeError, load_recipe
from ptkr_figures.render import render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="make-figures", description=__doc__)
    parser.add_argument(
        "--recipe",
        dest="recipes",
        action="append",
        required=True,
        metavar="FILE",
        help="recipe file (repeatable; one figure per recipe)",
    )
    parser.add_argument("--out", help="directory for the rendered images")
    args = parser.parse_args(argv)

    try:
        for path in args.recipes:
            recipe = load_recipe(path, out_dir=args.out)
            written = render(recipe)
            print(f"wrote {written}")
    except (RecipeError, FileNotFoundError) as exc:
        print(f"make-figures: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
