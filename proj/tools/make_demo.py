#!/usr/bin/env python3
"""Regenerates data/demo: the canary wing dataset, a small gallery and the canary recipe."""

import json
import math
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data" / "demo"


def fmt(v):
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def canary_csv():
    lines = ["time_frame,wing_type,keypoint,x_position,y_position"]
    for t in range(1, 9):
        angle = math.radians(40 * math.sin(2 * math.pi * (t - 1) / 8))
        for wing, side in (("left", -1), ("right", 1)):
            for k in range(1, 6):
                r = 12 * k
                x = side * (8 + r * math.cos(angle))
                y = 20 + r * math.sin(angle)
                lines.append(f"{t},{wing},{k},{fmt(x)},{fmt(y)}")
    return "\n".join(lines) + "\n"


def svg(body, size=100):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">{body}</svg>\n')


def bird(wing_angle, body="#f5c518", wing="#e0a800"):
    a = math.radians(wing_angle)
    tipx, tipy = 50 + 34 * math.cos(a), 50 - 34 * math.sin(a)
    return svg(
        f'<ellipse cx="50" cy="56" rx="26" ry="18" fill="{body}"/>'
        f'<circle cx="72" cy="42" r="11" fill="{body}"/>'
        f'<path d="M82 42 L92 45 L82 48 Z" fill="#f08a24"/>'
        f'<circle cx="75" cy="40" r="2" fill="#1a1a1a"/>'
        f'<path d="M40 52 L{fmt(tipx)} {fmt(tipy)} L58 58 Z" fill="{wing}"/>'
        f'<path d="M24 56 L8 50 L10 64 Z" fill="{wing}"/>')


STATIC = {
    "canary": ("a small yellow canary bird perched", bird(20)),
    "bluebird": ("a blue bird with spread wings", bird(35, "#3b7dd8", "#2a5ea8")),
    "basketball": ("an orange basketball ball for the lakers game",
                   svg('<circle cx="50" cy="50" r="40" fill="#f28c28"/>'
                       '<path d="M10 50 H90 M50 10 V90" stroke="#5a2d0c" stroke-width="3" fill="none"/>')),
    "trophy": ("a gold trophy cup for the championship winner",
               svg('<path d="M30 15 H70 V40 Q70 60 50 62 Q30 60 30 40 Z" fill="#d4a017"/>'
                   '<rect x="44" y="62" width="12" height="14" fill="#b8860b"/>'
                   '<rect x="32" y="76" width="36" height="8" fill="#8b6508"/>')),
    "music": ("a green music note for a streaming playlist",
              svg('<path d="M40 20 L75 12 V62" stroke="#1db954" stroke-width="6" fill="none"/>'
                  '<circle cx="34" cy="72" r="11" fill="#1db954"/><circle cx="68" cy="64" r="11" fill="#1db954"/>')),
    "sun": ("a bright yellow sun with rays",
            svg('<circle cx="50" cy="50" r="22" fill="#ffcc00"/>'
                + "".join(f'<rect x="48" y="6" width="4" height="14" fill="#ff9900" '
                          f'transform="rotate({a} 50 50)"/>' for a in range(0, 360, 45)))),
    "leaf": ("a green leaf from a tree in spring",
             svg('<path d="M20 80 Q20 20 80 20 Q80 80 20 80 Z" fill="#4caf50"/>'
                 '<path d="M20 80 L70 30" stroke="#2e7d32" stroke-width="3"/>')),
    "wave": ("a blue ocean wave by the sea",
             svg('<path d="M0 60 Q25 35 50 60 T100 60 V100 H0 Z" fill="#1e88e5"/>'
                 '<path d="M0 75 Q25 55 50 75 T100 75 V100 H0 Z" fill="#0d47a1"/>')),
    "heart": ("a red heart for love and health",
              svg('<path d="M50 85 L15 50 A18 18 0 0 1 50 25 A18 18 0 0 1 85 50 Z" fill="#e53935"/>')),
    "coffee": ("a brown coffee cup with steam",
               svg('<rect x="25" y="40" width="40" height="40" rx="6" fill="#6d4c41"/>'
                   '<path d="M65 48 Q82 48 82 60 Q82 72 65 72" stroke="#6d4c41" stroke-width="5" fill="none"/>'
                   '<path d="M38 32 Q34 24 40 16 M52 32 Q48 24 54 16" stroke="#9e9e9e" stroke-width="3" fill="none"/>')),
    "feather": ("a single yellow feather of a canary",
                svg('<path d="M30 85 Q40 30 80 15 Q70 60 30 85 Z" fill="#f7d038"/>'
                    '<path d="M30 85 L75 22" stroke="#c9a400" stroke-width="2"/>')),
    "egg": ("a speckled bird egg in a nest",
            svg('<ellipse cx="50" cy="48" rx="22" ry="30" fill="#f3ead7"/>'
                '<path d="M18 70 Q50 95 82 70" stroke="#8d6e63" stroke-width="8" fill="none"/>')),
}

ANIMATED = {
    "canary-flap": ("a yellow canary bird flapping its wings in flight", 24, 50,
                    lambda i: bird(40 * math.sin(2 * math.pi * i / 24)),
                    lambda i: "a yellow canary with wings " + ("up" if math.sin(2 * math.pi * i / 24) > 0 else "down")),
    "sun-spin": ("a bright yellow sun slowly rotating", 12, 100,
                 lambda i: svg('<circle cx="50" cy="50" r="22" fill="#ffcc00"/>'
                               + "".join(f'<rect x="48" y="6" width="4" height="14" fill="#ff9900" '
                                         f'transform="rotate({a + i * 7.5} 50 50)"/>' for a in range(0, 360, 45))),
                 lambda i: "a rotating yellow sun"),
    "ball-bounce": ("an orange basketball bouncing on the court", 10, 80,
                    lambda i: svg(f'<circle cx="50" cy="{fmt(25 + 50 * abs(math.sin(math.pi * i / 10)))}" r="18" '
                                  f'fill="#f28c28"/><rect x="0" y="94" width="100" height="6" fill="#795548"/>'),
                    lambda i: "a bouncing orange basketball"),
}


def main():
    ROOT.mkdir(parents=True, exist_ok=True)
    (ROOT / "canary.csv").write_text(canary_csv())

    gallery = ROOT / "gallery"
    gallery.mkdir(exist_ok=True)
    assets = []
    for name, (caption, body) in STATIC.items():
        (gallery / f"{name}.svg").write_text(body)
        assets.append({"id": name, "kind": "static", "payload": f"{name}.svg", "caption": caption, "license": "CC0"})
    for name, (caption, n, delay, frame, frame_caption) in ANIMATED.items():
        d = gallery / name
        d.mkdir(exist_ok=True)
        files = []
        for i in range(n):
            fname = f"frame_{i:03d}.svg"
            (d / fname).write_text(frame(i))
            files.append(fname)
        (d / "animation.json").write_text(json.dumps({"frameDelayMs": delay, "frames": files}, indent=1) + "\n")
        assets.append({"id": name, "kind": "animated", "payload": f"{name}/animation.json", "caption": caption,
                       "frameCaptions": [frame_caption(i) for i in range(n)], "license": "CC0"})
    (gallery / "manifest.json").write_text(json.dumps({"assets": assets}, indent=1) + "\n")

    recipe = {
        "dataset": "canary.csv",
        "gallery": "gallery/manifest.json",
        "message": "Every time frame, the canary beats its wings: the x and y position of each wing type "
                   "traces the flap, in bright canary yellow.",
        "canvas": {"width": 960, "height": 720, "background": "#fffdf5"},
        "steps": [
            {"brush": "x and y position of each wing type", "kind": "visualization", "pick": 0,
             "config": [{"field": "animate", "value": "time_frame"}],
             "place": {"tx": 40, "ty": 120}},
            {"brush": "the canary beats its wings", "kind": "animated-graphic", "pick": 0,
             "merge": {"op": "sync", "with": 0},
             "place": {"tx": 600, "ty": 180, "scale": 2.5}},
            {"brush": "bright canary yellow", "kind": "color-palette", "pick": 1,
             "merge": {"op": "recolor", "targets": [0]}},
            {"text": {"content": "How a canary flaps", "sizePt": 30, "color": "#333333"},
             "place": {"tx": 40, "ty": 30}},
        ],
    }
    (ROOT / "canary_recipe.json").write_text(json.dumps(recipe, indent=1) + "\n")


if __name__ == "__main__":
    main()
