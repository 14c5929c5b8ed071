#!/usr/bin/env python
# -*- coding: utf-8 -*-

import argparse
import json
import logging
import logging.config
import os
import sys

import yaml

from occluplan import flags, settings
from occluplan.encoder import JsonDataEncoder
from occluplan.errors import ConfigurationError, GridError, OccluplanError
from occluplan.harness import RunConfig, compare_runs, prepare_ground_truth, run_batch, run_frame
from occluplan.occlusion import MapSpec, synth_sequence, write_sequence
from occluplan.semantic_grid import load_frame, load_grid
from occluplan.skeleton import graph_to_json, road_graph
from occluplan.svg import render_svg
from occluplan.utils import env_overrides, flatten

logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def parse_args(args):
    parser = argparse.ArgumentParser(prog='occluplan', description='Occlusion aware road planning on BEV grids')
    parser.add_argument('-c', '--config', help='path to config file (YAML or JSON)')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    synth = sub.add_parser('synth', help='synthesize an occluded drive sequence')
    synth.add_argument('--kind', default='T', help='S, L, T or X')
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--out', required=True, help='output directory')
    synth.add_argument('--width', type=int)
    synth.add_argument('--height', type=int)
    synth.add_argument('--road-width', type=int)
    synth.add_argument('--density', type=float, help='obstacle density in [0, 1]')

    run = sub.add_parser('run', help='run the pipeline over a sequence and write metrics')
    run.add_argument('--config', dest='run_config', help='path to config file (YAML or JSON)')
    run.add_argument('--dump-graph', action='store_true', help='write the skeleton graph of every frame')

    render = sub.add_parser('render', help='render one frame with its skeleton graph and plan as SVG')
    render.add_argument('--frame', required=True, help='frame grid file')
    render.add_argument('--out', required=True, help='SVG file')
    render.add_argument('--config', dest='run_config', help='path to config file (YAML or JSON)')
    render.add_argument('--gt', help='ground truth grid, plans against it when given')
    render.add_argument('--goal', type=int, nargs=2, metavar=('X', 'Y'), help='world goal cell')
    render.add_argument('--dump-graph', action='store_true', help='write the skeleton graph next to the SVG')

    compare = sub.add_parser('compare', help='paired comparison of two runs')
    compare.add_argument('--run', action='append', required=True, help='run output directory (twice)')

    return parser.parse_args(args)


def read_config(path):
    try:
        with open(path) as fd:
            config = yaml.safe_load(fd)
    except (IOError, OSError) as e:
        raise ConfigurationError('cannot read {} ({})'.format(path, e))
    except yaml.YAMLError as e:
        raise ConfigurationError('malformed {} ({})'.format(path, e))
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigurationError('{} must hold a mapping'.format(path))
    return flatten(config)


def load_config(path=None, environ=None):
    """
    --config file, then ./config.yaml, then built-in defaults; OCCLUPLAN_* environment variables override.
    """
    config = {}
    if path and not os.path.exists(path):
        raise ConfigurationError('config file {} does not exist'.format(path))
    for p in (path, 'config.yaml'):
        if p and os.path.exists(p):
            config = read_config(p)
            break

    # allow overwriting any configuration setting via env vars
    for k, v in env_overrides(environ).items():
        try:
            config[k] = yaml.safe_load(v)
        except yaml.YAMLError:
            config[k] = v
    return config


def configure_logging(config):
    settings.set_log_level(config.get('loglevel', 'INFO'))
    settings.set_external_config(config)
    logging.config.dictConfig(settings.LOGGING)


def cmd_synth(args, config):
    c = settings.default_config()
    c.update(config)
    try:
        spec = MapSpec(args.kind, args.road_width or c['synth.road_width'], args.seed,
                       args.density if args.density is not None else c['synth.obstacle_density'])
        seq = synth_sequence(spec, args.width or int(c['synth.width']), args.height or int(c['synth.height']),
                             step=float(c['synth.step']), n_rays=int(c['synth.n_rays']),
                             max_range=float(c['synth.max_range']), turn_lead=float(c['synth.turn_lead']))
    except (OccluplanError, ValueError) as e:
        raise ConfigurationError(str(e))
    path = write_sequence(seq, args.out)
    print(path)
    return EXIT_OK


def cmd_run(args, config):
    if args.dump_graph:
        config['dump_graph'] = True
    run_config = RunConfig.from_config(config)
    results = run_batch(run_config)
    failures = sum(r.failures for r in results)
    for r in results:
        print('{}: {} frames, {} failed, frames ahead {}'.format(r.sequence_id, len(r.reports), r.failures,
                                                               r.frames_ahead))
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_render(args, config):
    run_config = RunConfig.from_config(config)
    try:
        frame = load_frame(args.frame)
        gt = load_grid(args.gt) if args.gt else None
    except GridError as e:
        raise ConfigurationError(str(e))

    goal = tuple(args.goal) if args.goal else run_config.goal
    status = flags.FRAME_OK
    if gt is not None and goal is not None:
        truth = prepare_ground_truth(gt, goal, run_config)
        report, trajectory, _ = run_frame(frame, gt, run_config, goal=goal, truth=truth)
        status = report.flags
    else:
        trajectory = None
    road = road_graph(frame.grid, run_config.kernel, run_config.iterations, run_config.spur_length,
                      run_config.merge_length)

    render_svg(frame, road.graph, trajectory, args.out, goal=goal)
    if args.dump_graph:
        with open(os.path.splitext(args.out)[0] + '.graph.json', 'w', encoding='utf-8') as f:
            json.dump(graph_to_json(road.graph), f, cls=JsonDataEncoder, sort_keys=True)
    print(args.out)
    return EXIT_PARTIAL if flags.is_failed(status) else EXIT_OK


def cmd_compare(args, config):
    if len(args.run) != 2:
        raise ConfigurationError('compare needs exactly two --run directories')
    report = compare_runs(args.run[0], args.run[1])
    print(json.dumps(report, cls=JsonDataEncoder, indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    'synth': cmd_synth,
    'run': cmd_run,
    'render': cmd_render,
    'compare': cmd_compare,
}


def main(args=None):
    args = parse_args(args)
    try:
        config = load_config(getattr(args, 'run_config', None) or args.config)
    except ConfigurationError as e:
        sys.stderr.write('{}\n'.format(e))
        return EXIT_CONFIG

    configure_logging(config)

    try:
        return COMMANDS[args.command](args, config)
    except (ConfigurationError, GridError) as e:
        logger.error('%s', e)
        return EXIT_CONFIG
    except OccluplanError as e:
        logger.error('Input error: %s', e)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
