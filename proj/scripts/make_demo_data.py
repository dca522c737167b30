#!/usr/bin/env python3
"""Generates the bundled episode libraries under data/.

data/demo      three mixed episodes on two maps
data/crossing  five crossing scenarios on an open hall

Maps are 8-bit binary PGMs (255 = free) with JSON sidecars; pedestrian tracks use the
four-column "frame ped x y" layout of the ETH/UCY annotations at 2.5 frames per second.
"""
import json
import math
import os
import sys

FPS = 2.5


def write_pgm(path, width, height, blocked):
    # blocked(col, row) uses map rows (row 0 at the bottom); images store the top row first
    data = bytearray()
    for img_row in range(height):
        row = height - 1 - img_row
        for col in range(width):
            data.append(0 if blocked(col, row) else 255)
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (width, height))
        f.write(bytes(data))


def room(width, height, wall=3, boxes=()):
    def blocked(c, r):
        if c < wall or r < wall or c >= width - wall or r >= height - wall:
            return True
        for c0, r0, c1, r1 in boxes:
            if c0 <= c < c1 and r0 <= r < r1:
                return True
        return False
    return blocked


def linear_walker(start, end, t0, speed):
    dx, dy = end[0] - start[0], end[1] - start[1]
    length = math.hypot(dx, dy)
    t1 = t0 + length / speed
    return [(t0, start), (t1, end)]


def sample_track(keys):
    """Samples piecewise-linear keyframes [(t, (x, y)), ...] on the frame grid."""
    t0, t1 = keys[0][0], keys[-1][0]
    first = math.ceil(t0 * FPS - 1e-9)
    last = math.floor(t1 * FPS + 1e-9)
    out = []
    for frame in range(first, last + 1):
        t = frame / FPS
        for (ta, pa), (tb, pb) in zip(keys, keys[1:]):
            if ta - 1e-9 <= t <= tb + 1e-9:
                s = 0.0 if tb == ta else (t - ta) / (tb - ta)
                out.append((frame, pa[0] + (pb[0] - pa[0]) * s, pa[1] + (pb[1] - pa[1]) * s))
                break
    return out


def write_tracks(path, walkers):
    rows = []
    for pid, keys in enumerate(walkers, start=1):
        for frame, x, y in sample_track(keys):
            rows.append((frame, pid, x, y))
    rows.sort()
    with open(path, "w") as f:
        for frame, pid, x, y in rows:
            f.write("%d %d %.4f %.4f\n" % (frame, pid, x, y))


def crossing_at(x, t_cross, robot_y, speed, upward, t_enter=0.0, y_lo=1.0, y_hi=13.0):
    """Walker moving vertically through (x, robot_y) at time t_cross."""
    sign = 1.0 if upward else -1.0
    y_start = robot_y - sign * speed * (t_cross - t_enter)
    y_start = min(max(y_start, y_lo), y_hi)
    t_start = t_cross - abs(robot_y - y_start) / speed
    y_end = y_hi if upward else y_lo
    return linear_walker((x, y_start), (x, y_end), t_start, speed)


def oblique_through(x, t_cross, robot_y, speed, angle, half_length=6.0):
    """Walker passing (x, robot_y) at t_cross along a line at `angle` from the +x axis."""
    ux, uy = math.cos(angle), math.sin(angle)
    start = (x - ux * half_length, robot_y - uy * half_length)
    end = (x + ux * half_length, robot_y + uy * half_length)
    return linear_walker(start, end, t_cross - half_length / speed, speed)


def write_env(root, name, width, height, res, blocked):
    env_dir = os.path.join(root, "environments")
    os.makedirs(env_dir, exist_ok=True)
    write_pgm(os.path.join(env_dir, name + ".pgm"), width, height, blocked)
    with open(os.path.join(env_dir, name + ".json"), "w") as f:
        json.dump({"name": name, "resolution": res, "origin": [0.0, 0.0]}, f, indent=2)
        f.write("\n")


def write_episode(root, name, env, start, goal, track_file, budget=60.0):
    ep_dir = os.path.join(root, "episodes")
    os.makedirs(ep_dir, exist_ok=True)
    manifest = {
        "name": name,
        "environment": env,
        "robot_start": {"x": start[0], "y": start[1], "heading": start[2]},
        "goal": {"x": goal[0], "y": goal[1]},
        "goal_radius": 0.3,
        "time_budget": budget,
        "tick_rate": 25.0,
        "pedestrian_radius": 0.3,
        "pedestrians": [{"file": track_file, "frame_rate": FPS, "t_start": 0.0, "t_end": budget}],
    }
    with open(os.path.join(ep_dir, name + ".json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


def robot_time(x, x0=2.0, v=1.2):
    return (x - x0) / v


def make_crossing(root):
    write_env(root, "hall", 220, 140, 0.1, room(220, 140))
    os.makedirs(os.path.join(root, "tracks"), exist_ok=True)
    y = 7.0
    scenarios = {
        "crossing_01_single": [
            crossing_at(8.0, robot_time(8.0), y, 1.3, True),
        ],
        "crossing_02_opposed": [
            crossing_at(7.0, robot_time(7.0), y, 1.2, True),
            crossing_at(12.0, robot_time(12.0), y, 1.4, False),
        ],
        "crossing_03_group": [
            crossing_at(10.0, robot_time(10.0) - 0.6, y, 1.2, True),
            crossing_at(10.6, robot_time(10.6), y, 1.2, True),
            crossing_at(11.2, robot_time(11.2) + 0.6, y, 1.2, True),
        ],
        "crossing_04_oblique": [
            oblique_through(9.0, robot_time(9.0), y, 1.2, math.radians(45.0)),
            crossing_at(6.0, robot_time(6.0), y, 1.3, False),
        ],
        "crossing_05_flow": [
            crossing_at(6.0 + 2.5 * k, robot_time(6.0 + 2.5 * k), y, 1.1 + 0.1 * (k % 3), k % 2 == 0)
            for k in range(5)
        ],
    }
    for name, walkers in scenarios.items():
        track = "tracks/%s.txt" % name
        write_tracks(os.path.join(root, track), walkers)
        write_episode(root, name, "hall", (2.0, y, 0.0), (20.0, y), track)


def make_demo(root):
    write_env(root, "plaza", 160, 120, 0.1, room(160, 120))
    write_env(root, "atrium", 200, 120, 0.1, room(200, 120, boxes=[(90, 30, 110, 90)]))
    os.makedirs(os.path.join(root, "tracks"), exist_ok=True)

    plaza = [
        linear_walker((3.0, 2.0), (13.0, 10.0), 0.0, 1.2),
        linear_walker((14.0, 3.0), (2.0, 9.0), 1.0, 1.0),
        [(0.0, (8.0, 2.0)), (4.0, (8.0, 6.5)), (8.0, (8.0, 6.5)), (12.0, (12.0, 10.0))],
    ]
    write_tracks(os.path.join(root, "tracks/plaza.txt"), plaza)
    write_episode(root, "demo_plaza_diagonal", "plaza", (2.0, 6.0, 0.0), (14.0, 6.0), "tracks/plaza.txt")
    write_episode(root, "demo_plaza_vertical", "plaza", (6.0, 2.0, math.pi / 2), (6.0, 10.0),
                  "tracks/plaza.txt", budget=30.0)

    atrium = [
        crossing_at(5.0, 2.5, 6.0, 1.2, True, y_lo=1.0, y_hi=11.0),
        linear_walker((17.0, 10.5), (3.0, 10.5), 0.0, 1.3),
        linear_walker((15.0, 1.5), (15.0, 10.5), 3.0, 1.0),
    ]
    write_tracks(os.path.join(root, "tracks/atrium.txt"), atrium)
    write_episode(root, "demo_atrium_detour", "atrium", (2.0, 6.0, 0.0), (18.0, 6.0), "tracks/atrium.txt")


def main():
    base = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data")
    make_demo(os.path.join(base, "demo"))
    make_crossing(os.path.join(base, "crossing"))


if __name__ == "__main__":
    main()
