"""Standalone renderer: render <csv> --kind <k> --out <png>."""

from __future__ import annotations

import argparse
import sys
import traceback

from .render import FigureKind, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a routegame sweep CSV into a figure.",
    )
    parser.add_argument("csv", help="sweep CSV produced by `routegame sweep`")
    parser.add_argument(
        "--kind",
        required=True,
        choices=[k.value for k in FigureKind],
        help="figure style",
    )
    parser.add_argument("--out", required=True, help="output image path (PNG)")
    parser.add_argument(
        "--overlay-config",
        default=None,
        help="game config JSON used by the sweep; enables analytic threshold overlays",
    )
    parser.add_argument(
        "--pinned-s",
        type=float,
        default=None,
        help="cascade level the sweep pinned (user-heatmap overlay)",
    )
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        csv_path=args.csv,
        kind=FigureKind(args.kind),
        out_path=args.out,
        overlay_config=args.overlay_config,
        pinned_s=args.pinned_s,
        dpi=args.dpi,
    )
    try:
        info = render(spec)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except Exception:
        sys.stderr.write("internal error:\n")
        traceback.print_exc(file=sys.stderr)
        return 1
    sys.stdout.write(
        f"wrote {info.out_path} ({info.width_px}x{info.height_px}px, "
        f"{info.blanked_cells} blanked cells)\n"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
