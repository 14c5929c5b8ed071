# -*- coding: utf-8 -*-
"""
Project settings for production runs:
 To customize the settings for a local environment please create another module called settings_local.py and change
 there the values you want, they will override the ones in this file
"""

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'custom': {
            'format': '%(levelname)s [occluplan-%(process)d] %(name)s/%(funcName)s: %(message)s'
        },
    },

    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'custom'
        },
    },

    'loggers': {
        '': {
            'handlers': ['console'],
            'propagate': True,
            'level': 'INFO',
        },
    }
}


DEFAULT_CONFIG = {
    'loglevel': 'INFO',

    # dataset synthesis
    'synth.kind': 'T_JUNCTION',
    'synth.seed': 0,
    'synth.width': 256,
    'synth.height': 256,
    'synth.road_width': 20,
    'synth.obstacle_density': 0.7,
    'synth.step': 2,
    'synth.n_rays': 720,
    'synth.max_range': 100,
    'synth.turn_lead': 24,
    # list of seeds, one sequence each
    'synth.seeds': None,

    # manifest of a sequence on disk, replaces synthesis
    'sequence': None,
    # world goal cell [x, y], defaults to the goal of the sequence
    'goal': None,

    # classes dropped from loaded maps and EXTERNAL maps before anything else, [] keeps all
    'preprocess.remove_classes': ['VEGETATION'],

    # inpainting
    'inpaint.method': 'IDENTITY',
    'inpaint.radius': 1,
    'inpaint.leak_radius': 40,
    # EXTERNAL maps, may hold a {frame_id} placeholder
    'inpaint.path': None,

    # road mask and skeleton
    'closing.kernel': 5,
    'closing.iterations': 2,
    'skeleton.spur_length': 16,
    'skeleton.merge_length': 16,

    # hybrid A*
    'vehicle.r_min': 25.0,
    'vehicle.step_length': 5.0,
    'vehicle.n_steer': 5,
    'vehicle.theta_bins': 72,
    'vehicle.goal_tol': 3.0,
    'vehicle.max_expansions': 30000,
    # closed-set cell size, half a step when None
    'vehicle.xy_resolution': None,

    # evaluation
    'turn_threshold': 30.0,
    'difficulty.range': 100,
    'output_dir': 'occluplan-out',
    'render_svg': False,
    'dump_graph': False,
    'parallelism': 1,
}
