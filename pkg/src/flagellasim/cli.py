"""Command-line interface: run, calibrate, mix, serve, replay."""

import argparse
import asyncio
import math
import sys

from .ballast import neutral_ballast_mass, trim_select
from .config import load_config
from .mixer import ManeuverCommand, build_allocation, mix
from .geometry import dodecahedron_mounts
from .runtime import run_scenario, write_log
from .server import ServerStartupError, TeleopServer, replay_session


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    frames = run_scenario(cfg)
    write_log(args.out, cfg, frames)
    final = frames[-1]
    print(f"wrote {len(frames)} frames to {args.out}")
    print(
        f"final t={final[0]:.3f} s  position=({final[1]:.3f}, {final[2]:.3f}, {final[3]:.3f}) m"
        f"  heading={math.degrees(final[32]):.2f} deg"
    )
    return 0


def _cmd_calibrate(args) -> int:
    cfg = load_config(args.config)
    r = cfg.robot
    neutral = neutral_ballast_mass(r.fluid_density, r.displaced_volume, r.dry_mass)
    print(f"dry mass:            {r.dry_mass:.3f} kg")
    print(f"displaced volume:    {r.displaced_volume:.6f} m^3")
    print(f"neutral ballast:     {neutral:.3f} kg")
    if neutral < 0:
        print("robot is negatively buoyant even unballasted; remove mass")
        return 0
    sel = trim_select(neutral, cfg.ballast_inventory)
    weights = ", ".join(f"{w:g} kg" for w in sel.weights) or "(none)"
    print(f"selected weights:    {weights}")
    print(f"selected total:      {sel.total_mass:.3f} kg")
    print(f"residual error:      {sel.error:.4f} kg")
    if sel.inventory_exhausted:
        print("warning: inventory empty, trim not achievable")
    return 0


def _cmd_mix(args) -> int:
    cfg = load_config(args.config)
    mounts = dodecahedron_mounts(cfg.frame)
    table = build_allocation(mounts, cfg.thrust_model, cfg.motors, cfg.mixer_omega_ref)
    duties = mix(ManeuverCommand(surge=args.surge, yaw=args.yaw), table)
    print(f"surge={args.surge:+.3f} yaw={args.yaw:+.3f}")
    for j, d in enumerate(duties.duties):
        print(f"pair {j}: duty {d:+.4f}")
    if args.table:
        print("\nallocation table (per unit duty, at the reference speed)")
        print("pair  force N (x, y, z)                torque N*m (x, y, z)")
        for j, u in enumerate(table.unit_wrenches):
            f = " ".join(f"{x:+.5f}" for x in u.force)
            t = " ".join(f"{x:+.6f}" for x in u.torque)
            print(f"{j}     {f}    {t}")
        print("surge weights:", " ".join(f"{w:+.4f}" for w in table.surge_weights))
        print("yaw weights:  ", " ".join(f"{w:+.4f}" for w in table.yaw_weights))
    return 0


def _cmd_serve(args) -> int:
    cfg = load_config(args.config)
    gateway = None if args.no_gateway else (args.gateway_port or args.port + 1)
    server = TeleopServer(
        cfg,
        port=args.port,
        telemetry_rate_hz=args.rate,
        host=args.host,
        session_path=args.session,
        gateway_port=gateway,
    )
    print(f"wire protocol on tcp://{args.host}:{args.port}")
    if gateway:
        print(f"console + websocket gateway on http://{args.host}:{gateway} (/ws)")
    if args.session:
        print(f"recording session to {args.session}")
    try:
        asyncio.run(server.serve_until_done())
    except ServerStartupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_replay(args) -> int:
    cfg = load_config(args.config)
    frames = replay_session(cfg, args.session)
    write_log(args.out, cfg, frames)
    print(f"replayed {len(frames)} frames to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="flagellasim",
        description="12-arm flagellar underwater robot simulator and teleoperation server",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="batch-run a scenario and write the trajectory log")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("calibrate", help="neutral ballast and trim weight selection")
    p.add_argument("config")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("mix", help="print the pair duties for a maneuver command")
    p.add_argument("config")
    p.add_argument("--surge", type=float, required=True)
    p.add_argument("--yaw", type=float, required=True)
    p.add_argument("--table", action="store_true", help="also dump the allocation table")
    p.set_defaults(func=_cmd_mix)

    p = sub.add_parser("serve", help="realtime telemetry/command server")
    p.add_argument("config")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--rate", type=float, default=20.0, help="telemetry rate (Hz)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--session", help="record the pilot session to this file")
    p.add_argument("--gateway-port", type=int, help="websocket/console port (default port+1)")
    p.add_argument("--no-gateway", action="store_true", help="TCP wire protocol only")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("replay", help="re-run a recorded pilot session in batch")
    p.add_argument("config")
    p.add_argument("session")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_replay)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
