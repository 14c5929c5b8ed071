#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Per-frame pipeline (inpaint -> road mask -> skeleton -> local goal -> plan) on the processed frame and
on the ground truth, metric aggregation with easy/hard splits, and the run outputs.
"""

import csv
import json
import logging
import os
import time
from collections import namedtuple
from multiprocessing import Pool

import numpy as np
import opentracing
import setproctitle

from occluplan import flags
from occluplan.encoder import JsonDataEncoder
from occluplan.errors import (ConfigurationError, InpaintError, MetricError, NoPathError, OccluplanError,
                              OffMaskError, PlanningError, SkeletonError)
from occluplan.inpaint import EXTERNAL, InpaintMethod, inpaint
from occluplan.mathfun import avg, defined, median, weighted_avg
from occluplan.metrics import (CSV_FIELDS, Difficulty, MetricsReport, TRAJECTORY_METRICS, aad, branch_accuracy,
                               classify_difficulty, frames_ahead, frechet_distance, path_length,
                               path_length_ratio)
from occluplan.occlusion import MapSpec, load_sequence, synth_sequence
from occluplan.planner import Trajectory, VehicleParams, holonomic_costmap, plan, select_local_goal
from occluplan.semantic_grid import ClassId, parse_classes, remove_classes
from occluplan.settings import default_config
from occluplan.skeleton import count_branches, graph_to_json, road_graph
from occluplan.svg import render_svg
from occluplan.utils import flatten

logger = logging.getLogger(__name__)


METRICS_CSV = 'metrics.csv'
SUMMARY_JSON = 'summary.json'
BATCH_JSON = 'batch.json'

SUMMARY_METRICS = TRAJECTORY_METRICS + ('frames_ahead',)

LOWER_IS_BETTER = frozenset(['frechet', 'aad'])


class RunConfig(namedtuple('RunConfig', 'sequence spec seeds width height step n_rays max_range turn_lead method '
                                        'kernel iterations spur_length merge_length vehicle goal turn_threshold '
                                        'difficulty_range output_dir parallelism render_svg dump_graph '
                                        'remove_classes')):
    __slots__ = ()

    @classmethod
    def from_config(cls, config=None):
        """
        Validate a (nested or flat) config dict, missing keys take the defaults.
        """
        c = default_config()
        c.update(flatten(config or {}))

        try:
            spec = MapSpec(c['synth.kind'], c['synth.road_width'], c['synth.seed'], c['synth.obstacle_density'])
            method = InpaintMethod(c['inpaint.method'], radius=c['inpaint.radius'],
                                   leak_radius=c['inpaint.leak_radius'], path=c['inpaint.path'])
            vehicle = VehicleParams(c['vehicle.r_min'], c['vehicle.step_length'], c['vehicle.n_steer'],
                                    c['vehicle.theta_bins'], c['vehicle.goal_tol'], c['vehicle.max_expansions'],
                                    c['vehicle.xy_resolution'])
            seeds = c['synth.seeds']
            if seeds is not None:
                if isinstance(seeds, (int, str)):
                    seeds = [seeds]
                seeds = [int(s) for s in seeds]
            goal = c['goal']
            if goal is not None:
                goal = tuple(int(v) for v in goal)
                if len(goal) != 2:
                    raise ValueError('goal must be [x, y], got {}'.format(c['goal']))
            run_config = cls(
                sequence=c['sequence'],
                spec=spec,
                seeds=seeds,
                width=int(c['synth.width']),
                height=int(c['synth.height']),
                step=float(c['synth.step']),
                n_rays=int(c['synth.n_rays']),
                max_range=float(c['synth.max_range']),
                turn_lead=float(c['synth.turn_lead']),
                method=method,
                kernel=int(c['closing.kernel']),
                iterations=int(c['closing.iterations']),
                spur_length=int(c['skeleton.spur_length']),
                merge_length=float(c['skeleton.merge_length']),
                vehicle=vehicle,
                goal=goal,
                turn_threshold=float(c['turn_threshold']),
                difficulty_range=float(c['difficulty.range']),
                output_dir=c['output_dir'],
                parallelism=int(c['parallelism']),
                render_svg=_as_bool(c['render_svg']),
                dump_graph=_as_bool(c['dump_graph']),
                remove_classes=parse_classes(c['preprocess.remove_classes']),
            )
        except (OccluplanError, ValueError, TypeError) as e:
            raise ConfigurationError(str(e)) from e

        run_config.validate()
        return run_config

    def validate(self):
        if self.parallelism < 1:
            raise ConfigurationError('parallelism must be >= 1, got {}'.format(self.parallelism))
        if self.kernel < 3 or self.kernel % 2 == 0:
            raise ConfigurationError('closing.kernel must be odd and >= 3, got {}'.format(self.kernel))
        if self.iterations < 1:
            raise ConfigurationError('closing.iterations must be >= 1, got {}'.format(self.iterations))
        if self.sequence and not os.path.exists(self.sequence):
            raise ConfigurationError('sequence manifest {} does not exist'.format(self.sequence))
        if self.method.path and '{' not in self.method.path and not os.path.exists(self.method.path):
            raise ConfigurationError('inpaint.path {} does not exist'.format(self.method.path))
        if not self.output_dir:
            raise ConfigurationError('output_dir must be set')
        if self.turn_threshold <= 0:
            raise ConfigurationError('turn_threshold must be > 0, got {}'.format(self.turn_threshold))


def _as_bool(value):
    if isinstance(value, str):
        return value.strip().lower() in ('1', 'true', 'yes', 'on')
    return bool(value)


class GroundTruth(namedtuple('GroundTruth', 'grid road branches goal costmap')):
    """
    Everything derived from the ground truth map of a sequence, computed once since the map is fixed.
    ``goal`` is the local goal on the ground truth graph, None when the graph is empty.
    """
    __slots__ = ()


class FrameOutcome(namedtuple('FrameOutcome', 'report trajectory gt_trajectory processed road elapsed')):
    __slots__ = ()


class Aggregate(namedtuple('Aggregate', 'frames means counts')):
    """
    Means over the frames where a metric is defined, with the number of such frames.
    """
    __slots__ = ()

    @classmethod
    def of(cls, reports):
        means = {}
        counts = {}
        for metric in TRAJECTORY_METRICS:
            values = defined(r.value(metric) for r in reports)
            means[metric] = avg(values)
            counts[metric] = len(values)
        return cls(len(reports), means, counts)

    def to_dict(self):
        return {'frames': self.frames, 'means': self.means, 'counts': self.counts}


class SequenceResult(namedtuple('SequenceResult', 'sequence_id reports overall easy hard frames_ahead turn_frame '
                                                  'failures method median_frame_ms')):
    __slots__ = ()

    def combined_mean(self, metric):
        """
        Frame-count weighted mean of the easy and hard means, equal to the overall mean
        """
        return weighted_avg([(self.easy.means[metric], self.easy.counts[metric]),
                             (self.hard.means[metric], self.hard.counts[metric])])

    def to_summary(self):
        return {
            'sequence_id': self.sequence_id,
            'method': self.method,
            'frames': len(self.reports),
            'failures': self.failures,
            'turn_frame': self.turn_frame,
            'frames_ahead': self.frames_ahead,
            'overall': self.overall.to_dict(),
            'easy': self.easy.to_dict(),
            'hard': self.hard.to_dict(),
            'median_frame_ms': self.median_frame_ms,
        }


def prepare_ground_truth(gt, goal, config):
    try:
        road = road_graph(gt, config.kernel, config.iterations, config.spur_length, config.merge_length)
    except SkeletonError as e:
        logger.error('Ground truth skeleton failed: %s', e)
        raise SkeletonError('unusable ground truth map: {}'.format(e)) from e
    if road.graph.is_empty():
        logger.warning('Ground truth map has no road skeleton')
        return GroundTruth(gt, road, 0, None, None)
    local_goal = select_local_goal(road.graph, goal)
    costmap = holonomic_costmap(road.mask, local_goal)
    return GroundTruth(gt, road, count_branches(road.graph), local_goal, costmap)


def _plan_on(road, start, goal, config, costmap=None):
    return plan(road.mask, start, goal, config.vehicle, costmap=costmap)


def process_frame(frame, gt, config, goal, truth=None, sequence_id=''):
    """
    Run the pipeline of one frame on the processed map and on the ground truth.
    """
    gt.check_same_shape(frame.grid)
    truth = truth if truth is not None else prepare_ground_truth(gt, goal, config)
    started = time.perf_counter()

    with opentracing.tracer.start_span(operation_name='run_frame') as span:
        span.set_tag('sequence_id', sequence_id)
        span.set_tag('frame_id', frame.frame_id)
        span.set_tag('inpaint', str(config.method))

        status = flags.FRAME_OK
        method = config.method.for_frame(frame.frame_id)
        road = None
        try:
            processed = inpaint(frame.grid, method, gt if method.needs_gt else None)
        except InpaintError as e:
            logger.warning('Frame %s: inpainting failed: %s', frame.frame_id, e)
            status |= flags.INPAINT_FAILED
            span.log_kv({'inpaint_failed': str(e)})
            processed = frame.grid
        else:
            if method.variant == EXTERNAL:
                processed = remove_classes(processed, config.remove_classes)
            try:
                road = road_graph(processed, config.kernel, config.iterations, config.spur_length,
                                  config.merge_length)
            except SkeletonError as e:
                logger.warning('Frame %s: skeleton failed: %s', frame.frame_id, e)

        trajectory = None

        if road is None or road.graph.is_empty():
            status |= flags.NO_GOAL | flags.PLAN_FAILED
        else:
            try:
                trajectory = _plan_on(road, frame.pose, select_local_goal(road.graph, goal), config)
            except PlanningError as e:
                logger.warning('Frame %s: %s', frame.frame_id, e)
                status |= flags.PLAN_FAILED
                span.log_kv({'plan_failed': str(e)})

        gt_trajectory = None
        if truth.goal is None:
            status |= flags.GT_NO_GOAL | flags.GT_PLAN_FAILED
        else:
            try:
                gt_trajectory = _plan_on(truth.road, frame.pose, truth.goal, config, costmap=truth.costmap)
            except (NoPathError, OffMaskError) as e:
                logger.warning('Frame %s: ground truth %s', frame.frame_id, e)
                status |= flags.GT_PLAN_FAILED
                span.log_kv({'gt_plan_failed': str(e)})

        branches = count_branches(road.graph) if road is not None else 0
        report = _report(sequence_id, frame, truth, config, status, trajectory, gt_trajectory, branches)
        span.set_tag('flags', '|'.join(flags.flag_names(status)) or 'OK')
        if flags.is_failed(status):
            span.set_tag('error', True)

    elapsed = time.perf_counter() - started
    logger.debug('Frame %s: %.1f%% known, flags %s, %.1f ms', frame.frame_id,
                 100.0 * np.count_nonzero(frame.grid.cells != ClassId.UNKNOWN) / frame.grid.cells.size,
                 flags.flag_names(status), 1000 * elapsed)
    return FrameOutcome(report, trajectory, gt_trajectory, processed, road, elapsed)


def _report(sequence_id, frame, truth, config, status, trajectory, gt_trajectory, branches):
    difficulty = classify_difficulty(truth.road.graph, frame.pose, config.difficulty_range)
    accuracy = branch_accuracy(branches, truth.branches) if truth.branches >= 1 else None

    frechet = angle = ratio = None
    if trajectory is not None and gt_trajectory is not None:
        frechet = frechet_distance(trajectory, gt_trajectory)
        angle = aad(trajectory, gt_trajectory)
        if path_length(gt_trajectory) > 0:
            ratio = path_length_ratio(trajectory, gt_trajectory)

    return MetricsReport(sequence_id, frame.frame_id, difficulty, status, frechet=frechet, aad=angle,
                         branch_accuracy=accuracy, path_length_ratio=ratio, branches=branches,
                         branches_gt=truth.branches)


def run_frame(frame, gt, config, goal=None, truth=None):
    """
    :return: (MetricsReport, Trajectory, ground truth Trajectory), failed plans give empty trajectories
    """
    goal = goal if goal is not None else config.goal
    if goal is None:
        raise ConfigurationError('run_frame needs a goal cell')
    outcome = process_frame(frame, gt, config, goal, truth=truth)
    empty = Trajectory.empty(config.vehicle.step_length)
    return (outcome.report, outcome.trajectory if outcome.trajectory is not None else empty,
            outcome.gt_trajectory if outcome.gt_trajectory is not None else empty)


_worker_state = {}


def _init_worker(state):
    _worker_state.clear()
    _worker_state.update(state)
    setproctitle.setproctitle('occluplan worker {}'.format(state['sequence_id']))


def _worker_frame(frame):
    s = _worker_state
    return process_frame(frame, s['gt'], s['config'], s['goal'], truth=s['truth'], sequence_id=s['sequence_id'])


def load_or_synth(config):
    if config.sequence:
        seq = load_sequence(config.sequence)
    else:
        seq = synth_sequence(config.spec, config.width, config.height, step=config.step, n_rays=config.n_rays,
                             max_range=config.max_range, turn_lead=config.turn_lead)
    return seq.without_classes(config.remove_classes)


def run_sequence(config, sequence=None, write=True):
    """
    Run every frame of the evaluation window, aggregate the metrics and write CSV + JSON (+ SVG).
    """
    seq = sequence if sequence is not None else load_or_synth(config)
    if not seq.frames:
        raise MetricError('Sequence {} has no frames'.format(seq.sequence_id))

    goal = config.goal if config.goal is not None else seq.goal
    first, last = seq.window
    frames = [f for f in seq.frames if first <= f.frame_id <= last]
    if not frames:
        raise MetricError('Sequence {} has no frames in window {}'.format(seq.sequence_id, seq.window))

    truth = prepare_ground_truth(seq.gt, goal, config)
    state = {'gt': seq.gt, 'config': config, 'goal': goal, 'truth': truth, 'sequence_id': seq.sequence_id}

    logger.info('Running sequence %s: %d frames, inpaint %s, parallelism %d', seq.sequence_id, len(frames),
                config.method, config.parallelism)

    if config.parallelism > 1 and len(frames) > 1:
        with Pool(processes=min(config.parallelism, len(frames)), initializer=_init_worker,
                  initargs=(state,)) as pool:
            outcomes = pool.map(_worker_frame, frames)
    else:
        outcomes = [process_frame(f, seq.gt, config, goal, truth=truth, sequence_id=seq.sequence_id)
                    for f in frames]
    outcomes.sort(key=lambda o: o.report.frame_id)

    reports = [o.report for o in outcomes]
    ahead = None
    frame_ids = [o.report.frame_id for o in outcomes]
    if seq.turn_frame in frame_ids:
        ahead = frames_ahead([o.trajectory for o in outcomes], frame_ids.index(seq.turn_frame), config.turn_threshold)

    result = SequenceResult(
        sequence_id=seq.sequence_id,
        reports=reports,
        overall=Aggregate.of(reports),
        easy=Aggregate.of([r for r in reports if r.difficulty == Difficulty.EASY]),
        hard=Aggregate.of([r for r in reports if r.difficulty == Difficulty.HARD]),
        frames_ahead=ahead,
        turn_frame=seq.turn_frame,
        failures=sum(1 for r in reports if flags.is_failed(r.flags)),
        method=str(config.method),
        median_frame_ms=1000 * median([o.elapsed for o in outcomes]),
    )
    logger.info('Sequence %s done: %d failures, frames ahead %s, means %s', seq.sequence_id, result.failures,
                ahead, result.overall.means)

    if write:
        write_outputs(result, config.output_dir)
        if config.render_svg or config.dump_graph:
            _write_frame_files(seq, outcomes, goal, config)
    return result


def write_outputs(result, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, METRICS_CSV), 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_FIELDS)
        for report in result.reports:
            writer.writerow(report.to_row())
    with open(os.path.join(out_dir, SUMMARY_JSON), 'w', encoding='utf-8') as f:
        json.dump(result.to_summary(), f, cls=JsonDataEncoder, indent=2, sort_keys=True)


def _write_frame_files(seq, outcomes, goal, config):
    by_id = {f.frame_id: f for f in seq.frames}
    for o in outcomes:
        frame_id = o.report.frame_id
        graph = o.road.graph if o.road is not None else None
        if config.render_svg:
            frame = by_id[frame_id]._replace(grid=o.processed)
            render_svg(frame, graph, o.trajectory, os.path.join(config.output_dir, 'frame_{:04d}.svg'.format(frame_id)),
                       goal=goal)
        if config.dump_graph and graph is not None:
            with open(os.path.join(config.output_dir, 'graph_{:04d}.json'.format(frame_id)), 'w',
                      encoding='utf-8') as f:
                json.dump(graph_to_json(graph), f, cls=JsonDataEncoder, sort_keys=True)


def run_batch(config):
    """
    One sequence per configured seed (or the manifest), each written under output_dir/<sequence_id>/.
    """
    if config.sequence or not config.seeds:
        configs = [config]
        sequence_ids = [None]
    else:
        configs = [config._replace(spec=config.spec._replace(seed=s)) for s in config.seeds]
        sequence_ids = ['{}-{}'.format(c.spec.kind.name.lower(), c.spec.seed) for c in configs]

    results = []
    for c, seq_id in zip(configs, sequence_ids):
        seq = load_or_synth(c)
        out = os.path.join(config.output_dir, seq_id or seq.sequence_id)
        results.append(run_sequence(c._replace(output_dir=out), sequence=seq))

    os.makedirs(config.output_dir, exist_ok=True)
    with open(os.path.join(config.output_dir, BATCH_JSON), 'w', encoding='utf-8') as f:
        json.dump({'sequences': [r.sequence_id for r in results], 'method': str(config.method)}, f, indent=2)
    return results


def _load_summaries(path):
    if os.path.isfile(path):
        path = os.path.dirname(path) or '.'
    summaries = {}
    for root, _, files in sorted(os.walk(path)):
        if SUMMARY_JSON in files:
            with open(os.path.join(root, SUMMARY_JSON), encoding='utf-8') as f:
                summary = json.load(f)
            summaries[summary['sequence_id']] = summary
    if not summaries:
        raise ConfigurationError('no {} found under {}'.format(SUMMARY_JSON, path))
    return summaries


def _summary_value(summary, metric):
    if metric == 'frames_ahead':
        return summary.get('frames_ahead')
    return summary['overall']['means'].get(metric)


def compare_runs(path_a, path_b):
    """
    Pair the sequences of two runs by id and report, per metric, both means and how often B beats A.
    """
    a = _load_summaries(path_a)
    b = _load_summaries(path_b)
    common = sorted(set(a) & set(b))
    if not common:
        raise ConfigurationError('runs {} and {} share no sequence'.format(path_a, path_b))

    report = {'sequences': common, 'metrics': {}}
    for metric in SUMMARY_METRICS:
        lower = metric in LOWER_IS_BETTER
        pairs = [(_summary_value(a[s], metric), _summary_value(b[s], metric)) for s in common]
        pairs = [(va, vb) for va, vb in pairs if va is not None and vb is not None]
        wins_b = sum(1 for va, vb in pairs if (vb < va if lower else vb > va))
        wins_a = sum(1 for va, vb in pairs if (va < vb if lower else va > vb))
        report['metrics'][metric] = {
            'better': 'lower' if lower else 'higher',
            'mean_a': avg([va for va, _ in pairs]),
            'mean_b': avg([vb for _, vb in pairs]),
            'paired': len(pairs),
            'wins_a': wins_a,
            'wins_b': wins_b,
            'ties': len(pairs) - wins_a - wins_b,
        }
    return report
