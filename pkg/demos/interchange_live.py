#!/usr/bin/env python3
"""
Drive the renderer from a live physics process over shared memory.

Usage:
  python3 demos/interchange_live.py
  python3 demos/interchange_live.py --frames 8 --tick-hz 120
  python3 demos/interchange_live.py --crash-after 5   # watch the renderer cope

A stub physics integrator runs in its own process and publishes a 4x4
pose per body into a /dev/shm transform table, seqlock-versioned so a
reader never sees half a frame.  The renderer attaches read-only, pulls
one snapshot per frame, and keeps drawing with the last good poses if
the writer stalls or dies mid-run.
"""
from __future__ import annotations

import argparse
import multiprocessing
import sys
import time
import uuid

from softrender.frameloop import RenderConfig, run_frame_loop
from softrender.interchange import attach_table, stub_writer_loop, unlink_region
from softrender.procedural import make_demo_scene


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    ap.add_argument("--bodies", type=int, default=3)
    ap.add_argument("--frames", type=int, default=6)
    ap.add_argument("--tick-hz", type=float, default=240.0)
    ap.add_argument("--crash-after", type=int, default=None, metavar="TICKS",
                    help="simulate the physics process dying after N ticks")
    ap.add_argument("--out", default=None, help="write ppm frames with this prefix")
    args = ap.parse_args(argv)

    scene = make_demo_scene(args.bodies)
    names = [node.name for node in scene.mesh_nodes()]
    region = f"demo-{uuid.uuid4().hex[:8]}"
    print(f"bodies: {names}")
    print(f"shared region: /dev/shm/softrender-{region}")

    ctx = multiprocessing.get_context()
    stop = ctx.Event()
    writer = ctx.Process(target=stub_writer_loop,
                         args=(region, names, args.tick_hz, stop),
                         kwargs={"crash_after_ticks": args.crash_after})
    writer.start()

    reader = None
    try:
        deadline = time.monotonic() + 5.0
        while reader is None:
            try:
                reader = attach_table(region)
            except Exception:
                if time.monotonic() > deadline:
                    raise
                time.sleep(0.01)
        print("attached; rendering with pose_source=reader.read_frame\n")

        config = RenderConfig(width=160, height=120, msaa=2, fxaa=True,
                              shadows=False, overlay=True,
                              target_fps=min(args.tick_hz, 30.0))
        generations = []

        def note(i, resources):
            generations.append(None)

        images, timings, stats = run_frame_loop(
            scene, config, frames=args.frames,
            pose_source=reader.read_frame,
            output_prefix=args.out, on_frame=note)

        for t in timings:
            print(f"frame {t.frame_index}: main {t.main_pass_ms:7.2f} ms")
        print(f"\npose snapshots applied: {len(stats.pose_generations)} "
              f"(generations {stats.pose_generations})")
        if stats.pose_warnings:
            print(f"pose warnings: {stats.pose_warnings} -- the writer went away, "
                  "so those frames reused the last stable poses")
        elif len(set(stats.pose_generations)) < len(stats.pose_generations):
            print("the writer stopped mid-run; later frames re-read its last "
                  "stable frame (generations stall, nothing tears)")
        else:
            print("no pose warnings: every frame got a fresh snapshot")
        if args.out:
            print(f"frames written to {args.out}-frame-*.ppm")
    finally:
        stop.set()
        writer.join(timeout=5.0)
        if writer.is_alive():
            writer.terminate()
        if reader is not None:
            reader.close()
        unlink_region(region)
    if args.crash_after is not None and writer.exitcode not in (0, None):
        print(f"\nwriter exit code {writer.exitcode} (simulated crash); the region "
              "file kept its last stable frame until cleanup just now")
    return 0


if __name__ == "__main__":
    sys.exit(main())
