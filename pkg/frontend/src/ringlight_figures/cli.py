"""CLI: render bundled figure layouts from artifact directories."""

import argparse
import sys

from .reader import ArtifactError, ProvenanceError
from .renderer import build_named_figure


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ringlight-figures",
        description="Render paper-style figures from ringlight artifacts")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render a named figure")
    p.add_argument("--figure", required=True,
                   help="fig1, fig2a/b/c, fig4, fig5a, fig5b, fig6")
    p.add_argument("--artifacts", required=True,
                   help="scenario artifact directory")
    p.add_argument("--comparison",
                   help="comparison-scenario artifact directory (fig4 panel e)")
    p.add_argument("--out", help="output image path")
    args = parser.parse_args(argv)
    try:
        path = build_named_figure(args.figure, args.artifacts,
                                  output=args.out,
                                  comparison_dir=args.comparison)
    except (ArtifactError, ProvenanceError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
