"""
report.py:

This script contains the ReportGenerator class that runs one carpet-lab command against a
validated carpet (CarpetSpec) and writes its report files (CSV, JSON, SVG) into the
output directory.

Independent work items (slices, windows, estimators) fan out over threads with
asyncio.gather; results keep input order, so reports are byte-identical between runs.
Every file is written to a temporary file in the output directory and renamed into place.
"""

import asyncio
import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from carpet_lab.conditions import check_all
from carpet_lab.conditions import slice_conditions_hold
from carpet_lab.config import RunConfiguration
from carpet_lab.dimension import assouad_estimate
from carpet_lab.dimension import assouad_schedule
from carpet_lab.dimension import microset_dimension_gap
from carpet_lab.dimension import microset_search
from carpet_lab.dimension import minkowski_estimate
from carpet_lab.geometry import vertical_slice
from carpet_lab.ifs_core import CarpetSpec
from carpet_lab.ifs_core import normalize
from carpet_lab.regularity import abscissa_samples
from carpet_lab.regularity import verify_slice_regularity
from carpet_lab.render import render_cloud
from carpet_lab.render import render_construction
from carpet_lab.scales import sample_schedule
from carpet_lab.scales import verify_littlethings
from carpet_lab.tangents import analyze_endings
from carpet_lab.tangents import center_line_windows
from carpet_lab.tangents import fit_product_form
from carpet_lab.tangents import rescale_window
from carpet_lab.tangents import verify_epspatterns

CONSTANT_FIELDS = ['name', 'value', 'lower', 'upper', 'certified_depth']
CONDITION_FIELDS = ['condition', 'verdict', 'certified_depth', 'witnesses']
WITNESS_FIELDS = ['condition', 'x_lo', 'x_hi']
SLICE_FIELDS = ['x', 'lo', 'hi']
REGULARITY_FIELDS = ['x', 'porosity_est', 'porosity_bound', 'perfectness_est', 'perfectness_bound', 'pass']
SCALE_FIELDS = ['t', 'prefix', 'n_lower', 'n_exact', 'n_upper', 'ratio', 'lo_bound', 'hi_bound', 'pass']
ENDING_FIELDS = ['K', 'delta_K', 't_K', 'n_required', 'degenerate', 'endings']
CLOUD_FIELDS = ['scale_index', 't', 'points', 'w', 'residual']
ESTIMATE_FIELDS = ['method', 'level_lo', 'level_hi', 'value', 'adjusted', 'samples']


async def gather_batch(function, arguments: list[tuple]) -> list:
    """Run function over every argument tuple in worker threads, keeping input order."""

    tasks = [asyncio.to_thread(function, *args) for args in arguments]
    return await asyncio.gather(*tasks)


def run_batch(function, arguments: list[tuple]) -> list:
    """Synchronous entry point to gather_batch."""

    return asyncio.run(gather_batch(function, arguments))


def write_atomic(path: Path, text: str) -> None:
    """Write text to path through a temporary file and a rename."""

    with tempfile.NamedTemporaryFile('w', encoding='utf-8', dir=path.parent,
                                     prefix=f'.{path.name}.', delete=False) as stream:
        stream.write(text)
        temporary = stream.name
    os.replace(temporary, path)


def csv_text(fields: list[str], rows: list[dict]) -> str:
    """CSV text with a header row and Unix line endings."""

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fields, lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(value) for key, value in row.items()})
    return buffer.getvalue()


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int | str):
        return str(value)
    return repr(float(value))


def constant_rows(spec: CarpetSpec) -> list[dict]:
    """Derived constants of the carpet with their certified bounds."""

    bounds = spec.delta_bounds
    rows = [
        {'name': 'alpha_bar', 'value': spec.alpha_bar, 'lower': spec.alpha_bar, 'upper': spec.alpha_bar,
         'certified_depth': 0},
        {'name': 'alpha_under', 'value': spec.alpha_under, 'lower': spec.alpha_under,
         'upper': spec.alpha_under, 'certified_depth': 0},
        {'name': 'beta', 'value': spec.beta, 'lower': spec.beta, 'upper': spec.beta, 'certified_depth': 0},
        {'name': 'delta', 'value': bounds.lower, 'lower': bounds.lower, 'upper': bounds.upper,
         'certified_depth': bounds.depth},
        {'name': 'diam_q', 'value': spec.diam_q, 'lower': spec.diam_q,
         'upper': spec.diam_q + 2 * spec.q_error,
         'certified_depth': 0}
    ]
    for name, value in zip(('q_xmin', 'q_xmax', 'q_ymin', 'q_ymax'), spec.q.as_floats()):
        rows.append({'name': name, 'value': value, 'lower': value - spec.q_error,
                     'upper': value + spec.q_error, 'certified_depth': 0})
    return rows


def _normalized(spec: CarpetSpec) -> CarpetSpec:
    return normalize(spec) if spec.diam_q > 1 + 1e-9 else spec


class ReportGenerator:
    """Runs one command and writes its report files."""

    def __init__(self,
                 config: RunConfiguration,
                 spec: CarpetSpec) -> None:
        self.logger = logging.getLogger('root')
        self.config = config
        self.spec = spec
        self.out = Path(config.out)
        self.files = []

    def __str__(self) -> str:
        return json.dumps({'config': str(self.config), 'out': str(self.out), 'files': self.files},
                          indent=2, sort_keys=True)

    def __repr__(self) -> str:
        return self.__str__()

    def write(self, name: str, text: str) -> None:
        """Write one report file atomically into the output directory."""

        self.out.mkdir(parents=True, exist_ok=True)
        write_atomic(self.out / name, text)
        self.files.append(name)
        self.logger.debug('written: %s', name)

    def generate_report(self) -> dict:
        """Run the configured command and return its summary."""

        commands = {
            'check': self.generate_check_report,
            'render': self.generate_render_report,
            'slice': self.generate_slice_report,
            'tangent': self.generate_tangent_report,
            'dim': self.generate_dimension_report,
            'scales': self.generate_scales_report
        }
        self.logger.info('command: %s', self.config.command)
        summary = commands[self.config.command]()
        summary['command'] = self.config.command
        summary['files'] = sorted(self.files)
        self.logger.info('passed: %s', summary['passed'])
        return summary

    def generate_check_report(self) -> dict:
        """Conditions table, failure witnesses and derived constants."""

        spec = self.spec
        results = check_all(spec, max(self.config.depth, 1))
        ssc_depth = spec.ssc_status.depth if spec.ssc_certified else spec.ssc_status.max_depth
        rows = [{'condition': 'SSC',
                 'verdict': 'holds' if spec.ssc_certified else 'uncertified',
                 'certified_depth': ssc_depth,
                 'witnesses': 0}]
        witnesses = []
        for result in results:
            rows.append({'condition': result.condition,
                         'verdict': result.verdict.value,
                         'certified_depth': result.certification_depth,
                         'witnesses': len(result.witnesses)})
            for x_lo, x_hi in result.witnesses:
                witnesses.append({'condition': result.condition, 'x_lo': x_lo, 'x_hi': x_hi})

        self.write('conditions.csv', csv_text(CONDITION_FIELDS, rows))
        self.write('witnesses.csv', csv_text(WITNESS_FIELDS, witnesses))
        self.write('constants.csv', csv_text(CONSTANT_FIELDS, constant_rows(spec)))

        h1 = next(r for r in results if r.condition == 'H1')
        verdicts = {row['condition']: row['verdict'] for row in rows}
        return {'passed': spec.ssc_certified and h1.holds and slice_conditions_hold(spec),
                'verdicts': verdicts}

    def generate_render_report(self) -> dict:
        """Construction drawing, plus one with endings, projection and slice overlays."""

        spec = self.spec
        depth = self.config.depth
        self.write('construction.svg', render_construction(spec, depth))

        abscissae = self.config.preset.slice.abscissae or abscissa_samples(spec, 3)
        slices = run_batch(vertical_slice, [(spec, x, max(depth, 1)) for x in abscissae])
        self.write('overlays.svg', render_construction(spec, depth, endings=True, projection=True,
                                                       slices=list(zip(abscissae, slices))))
        return {'passed': True, 'depth': depth}

    def generate_slice_report(self) -> dict:
        """Slice covers and their porosity and uniform perfectness against the slice constants."""

        spec = self.spec
        section = self.config.preset.slice
        abscissae = section.abscissae or abscissa_samples(spec, section.count)

        slices = run_batch(vertical_slice, [(spec, x, section.depth) for x in abscissae])
        rows = [{'x': x, 'lo': lo, 'hi': hi}
                for x, shape in zip(abscissae, slices)
                for lo, hi in shape.to_rows()]
        self.write('slices.csv', csv_text(SLICE_FIELDS, rows))

        reports = verify_slice_regularity(spec, abscissae, section.depth, grid=section.grid)
        self.write('regularity.csv', csv_text(REGULARITY_FIELDS, [r.to_row() for r in reports]))
        self.logger.info('slices: %s', len(reports))
        return {'passed': all(r.passed for r in reports),
                'slices': len(reports),
                'failed': sum(not r.passed for r in reports)}

    def generate_tangent_report(self) -> dict:
        """Ending analysis, slice-product checks along the center-line windows and fitted clouds."""

        spec = _normalized(self.spec)
        section = self.config.preset.tangent
        windows = center_line_windows(spec, section.windows)

        endings = [analyze_endings(spec, K) for K in section.levels]
        self.write('endings.csv', csv_text(ENDING_FIELDS, [{
            'K': e.K,
            'delta_K': e.delta_K,
            't_K': e.t_K,
            'n_required': e.n_required,
            'degenerate': e.degenerate,
            'endings': ' '.join(repr(float(x)) for x in e.ending_abscissae)
        } for e in endings]))

        arguments = [(spec, window.word, window.t, K) for K in section.levels for window in windows]
        reports = run_batch(verify_epspatterns, arguments)
        descriptors = [r.to_json() for r in reports]
        self.write('tangent.json', json.dumps(descriptors, indent=4, sort_keys=True) + '\n')

        first = max(section.first_fit_scale, 1) - 1
        fitted = windows[first:first + section.fit_scales]
        clouds = run_batch(rescale_window, [(spec, window) for window in fitted])
        forms = run_batch(fit_product_form, [(cloud,) for cloud in clouds])
        rows = []
        for index, (window, cloud, form) in enumerate(zip(fitted, clouds, forms), start=first + 1):
            self.write(f'cloud_{index}.svg', render_cloud(cloud, form))
            rows.append({'scale_index': index, 't': window.t, 'points': len(cloud),
                         'w': form.w, 'residual': form.residual})
        self.write('clouds.csv', csv_text(CLOUD_FIELDS, rows))

        self.logger.info('slice-product windows: %s', len(reports))
        return {'passed': all(r.passed for r in reports),
                'windows': len(reports),
                'failed': sum(not r.passed for r in reports)}

    def generate_dimension_report(self) -> dict:
        """Minkowski and Assouad estimates, the best microset and the microset slope gap."""

        spec = self.spec
        section = self.config.preset.dimension
        schedule = section.schedule or assouad_schedule(spec, section.assouad_samples, section.seed)

        minkowski, assouad, gap = run_batch(lambda job, *args: job(*args), [
            (minkowski_estimate, spec, section.levels),
            (assouad_estimate, spec, schedule, section.levels),
            (microset_dimension_gap, spec, section.microset_levels, schedule, section.window_budget,
             0.1, section.levels)
        ])
        self.write('estimates.csv', csv_text(ESTIMATE_FIELDS, [minkowski.to_row(), assouad.to_row()]))

        microset = microset_search(spec, section.microset_levels[1], section.window_budget)
        descriptor = microset.to_json()
        descriptor['gap'] = {'microset_slope': gap.microset_slope,
                             'fitted_slope': gap.fitted_slope,
                             'assouad': gap.assouad,
                             'gap': gap.gap,
                             'tolerance': gap.tolerance,
                             'pass': gap.passed}
        self.write('microset.json', json.dumps(descriptor, indent=4, sort_keys=True) + '\n')
        return {'passed': gap.passed,
                'minkowski': minkowski.value,
                'assouad': assouad.value}

    def generate_scales_report(self) -> dict:
        """Scale index samples against their bounds."""

        spec = _normalized(self.spec)
        section = self.config.preset.scales
        samples = sample_schedule(spec, section.count, section.t_range, section.seed)

        batches = run_batch(verify_littlethings, [(spec, [sample], section.cert_depth) for sample in samples])
        reports = [report for batch in batches for report in batch]
        self.write('scales.csv', csv_text(SCALE_FIELDS, [r.to_row() for r in reports]))
        self.logger.info('scale samples: %s', len(reports))
        return {'passed': all(r.passed for r in reports),
                'samples': len(reports),
                'failed': sum(not r.passed for r in reports)}
