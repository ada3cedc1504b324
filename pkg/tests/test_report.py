"""
test_report.py:

This file contains the unit tests for the ReportGenerator class and the batch, CSV and
file helpers of the report.py module.
"""

import csv
from io import StringIO
from unittest.mock import MagicMock
from unittest.mock import patch
from pytest import fixture
from pytest import mark
from carpet_lab.config import RunConfiguration
from carpet_lab.config import ScalesConfiguration
from carpet_lab.config import SliceConfiguration
from carpet_lab.config import TangentConfiguration
from carpet_lab.ifs_core import validate_carpet
from carpet_lab.report import ReportGenerator
from carpet_lab.report import constant_rows
from carpet_lab.report import csv_text
from carpet_lab.report import gather_batch
from carpet_lab.report import run_batch
from carpet_lab.report import write_atomic


def _generator(command: str, preset: str, out) -> ReportGenerator:
    config = RunConfiguration(command, preset=preset, out=str(out))
    spec = validate_carpet(config.load_document(StringIO()).maps)
    return ReportGenerator(config, spec)


def _rows(path) -> list[dict]:
    with open(path, encoding='utf-8') as stream:
        return list(csv.DictReader(stream))


# pylint: disable=redefined-outer-name
@fixture
def staggered_generator(tmp_path):
    """Returns a report generator for the staggered_columns preset writing into tmp_path."""

    return lambda command: _generator(command, 'staggered_columns', tmp_path)


@mark.asyncio
async def test_gather_batch():
    """Test that batch results keep the input order."""

    results = await gather_batch(pow, [(2, 3), (3, 2), (10, 0)])

    assert results == [8, 9, 1]


def test_run_batch():
    """Test the synchronous batch entry point."""

    assert run_batch(divmod, [(7, 2), (9, 3)]) == [(3, 1), (3, 0)]
    assert not run_batch(divmod, [])


def test_csv_text():
    """Test header, cell rendering and line endings."""

    text = csv_text(['a', 'b', 'c'], [{'a': None, 'b': True, 'c': 'x'}, {'a': 1, 'b': 0.5, 'c': 0.1}])

    assert text == 'a,b,c\n,true,x\n1,0.5,0.1\n'


def test_write_atomic(tmp_path):
    """Test that a write replaces the file and leaves no temporary file behind."""

    target = tmp_path / 'report.csv'
    write_atomic(target, 'first\n')
    write_atomic(target, 'second\n')

    assert target.read_text(encoding='utf-8') == 'second\n'
    assert [p.name for p in tmp_path.iterdir()] == ['report.csv']


def test_constant_rows():
    """Test the derived constants of the staggered carpet."""

    config = RunConfiguration('check', preset='staggered_columns')
    spec = validate_carpet(config.load_document(StringIO()).maps)
    rows = {row['name']: row for row in constant_rows(spec)}

    assert set(rows) == {'alpha_bar', 'alpha_under', 'beta', 'delta', 'diam_q',
                         'q_xmin', 'q_xmax', 'q_ymin', 'q_ymax'}
    assert float(rows['alpha_bar']['value']) == 0.5
    assert float(rows['delta']['lower']) == 0.05


def test_generate_check_report(staggered_generator, tmp_path):
    """Test the check command on a carpet satisfying every condition."""

    report = staggered_generator('check').generate_report()

    assert report['passed']
    assert report['command'] == 'check'
    assert report['files'] == ['conditions.csv', 'constants.csv', 'witnesses.csv']
    assert report['verdicts']['SSC'] == 'holds'

    conditions = _rows(tmp_path / 'conditions.csv')
    assert conditions[0]['condition'] == 'SSC'
    assert {row['condition'] for row in conditions} >= {'SSC', 'H1', 'H2'}
    assert not _rows(tmp_path / 'witnesses.csv')


def test_generate_check_report_witnesses(tmp_path):
    """Test that a vertical line missing the carpet is reported as a witness."""

    _generator('check', 'projection_gap', tmp_path).generate_report()

    witnesses = _rows(tmp_path / 'witnesses.csv')
    assert {'condition': 'H2', 'x_lo': '0.6', 'x_hi': '0.8'} in witnesses


def test_generate_render_report(staggered_generator, tmp_path):
    """Test the render command."""

    report = staggered_generator('render').generate_report()

    assert report['passed']
    assert report['files'] == ['construction.svg', 'overlays.svg']
    assert (tmp_path / 'construction.svg').read_text(encoding='utf-8').startswith('<svg')


def test_generate_slice_report(staggered_generator, tmp_path):
    """Test the slice command at three abscissae."""

    generator = staggered_generator('slice')
    generator.config.preset.slice = SliceConfiguration(
        {'abscissae': [0.125, 0.375, 0.625], 'depth': 6, 'grid': 4})
    report = generator.generate_report()

    assert report['passed']
    assert report['slices'] == 3
    assert report['files'] == ['regularity.csv', 'slices.csv']
    assert [row['x'] for row in _rows(tmp_path / 'regularity.csv')] == ['0.125', '0.375', '0.625']


@patch('carpet_lab.report.verify_epspatterns')
def test_generate_tangent_report(mock_verify_epspatterns, staggered_generator, tmp_path):
    """Test the tangent command with the slice-product check mocked."""

    mock_verify_epspatterns.return_value = MagicMock(passed=True)
    mock_verify_epspatterns.return_value.to_json.return_value = {'pass': True}

    generator = staggered_generator('tangent')
    generator.config.preset.tangent = TangentConfiguration(
        {'levels': [1, 2], 'windows': 3, 'fit_scales': 1, 'first_fit_scale': 3})
    report = generator.generate_report()

    assert report['passed']
    assert report['windows'] == 6
    assert mock_verify_epspatterns.call_count == 6
    assert report['files'] == ['cloud_3.svg', 'clouds.csv', 'endings.csv', 'tangent.json']
    assert [row['K'] for row in _rows(tmp_path / 'endings.csv')] == ['1', '2']
    assert _rows(tmp_path / 'clouds.csv')[0]['scale_index'] == '3'


def test_generate_tangent_report_preset(staggered_generator, tmp_path):
    """Test the tangent command with the shipped staggered_columns section."""

    report = staggered_generator('tangent').generate_report()

    assert report['passed']
    assert report['windows'] == 30
    assert report['files'] == ['cloud_3.svg', 'cloud_4.svg', 'cloud_5.svg', 'cloud_6.svg',
                               'clouds.csv', 'endings.csv', 'tangent.json']
    clouds = _rows(tmp_path / 'clouds.csv')
    assert [row['scale_index'] for row in clouds] == ['3', '4', '5', '6']
    assert float(clouds[-1]['residual']) < float(clouds[0]['residual'])


def test_generate_scales_report(staggered_generator, tmp_path):
    """Test the scales command with two random samples and the two edge cases."""

    generator = staggered_generator('scales')
    generator.config.preset.scales = ScalesConfiguration({'count': 2, 'seed': 1})
    report = generator.generate_report()

    assert report['samples'] == 4
    assert report['files'] == ['scales.csv']
    assert len(_rows(tmp_path / 'scales.csv')) == 4


def test_generate_dimension_report(tmp_path):
    """Test the dim command on the unit square."""

    report = _generator('dim', 'unit_square', tmp_path).generate_report()

    assert report['passed']
    assert abs(report['minkowski'] - 2.0) < 1e-9
    assert report['files'] == ['estimates.csv', 'microset.json']
    assert [row['method'] for row in _rows(tmp_path / 'estimates.csv')] == ['minkowski', 'assouad']


def test_generate_dimension_report_staggered(staggered_generator, tmp_path):
    """Test the dim command with the shipped staggered_columns section."""

    report = staggered_generator('dim').generate_report()

    assert report['passed']
    assert report['minkowski'] <= report['assouad'] + 0.05
    rows = _rows(tmp_path / 'estimates.csv')
    assert [(row['level_lo'], row['level_hi']) for row in rows] == [('3', '9'), ('3', '9')]
