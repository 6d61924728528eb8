import json

import pytest

from ito_fourier.bases import LegendreBasis
from ito_fourier.cli import (
    DEFAULT_SEED,
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_USAGE,
    SEED_ENVIRONMENT,
    main,
    parse_command,
    resolve_seed,
)
from ito_fourier.coefficients import build_table
from ito_fourier.exceptions import DomainError
from ito_fourier.models import IntegrationInterval, WeightFunction
from ito_fourier.serialization import body_of, dumps_csv, load_table, save_table


def _run(tmp_path, name, *argv):
    output = tmp_path / name
    code = main([*argv, '--output', str(output)])
    return code, output.read_text(encoding='utf-8') if output.exists() else None


def test_residual_document(tmp_path):
    code, text = _run(tmp_path, 'residual.json', 'residual', '--k', '2', '--p', '1')
    assert code == EXIT_OK
    document = json.loads(text)
    assert document['body']['residual'] == pytest.approx(0.08333333333, abs=1e-10)
    assert document['body']['mse_bound'] == pytest.approx(0.16666666667, abs=1e-10)
    assert document['header']['command'] == 'residual'
    assert document['header']['seed_source'] in ('default', 'environment')


def test_single_integral_coefficients(tmp_path):
    code, text = _run(tmp_path, 'coeffs.json', 'coeffs', '--k', '1', '--p', '3')
    assert code == EXIT_OK
    values = [entry['value'] for entry in json.loads(text)['body']['entries']]
    assert values == pytest.approx([1.0, 0.0, 0.0, 0.0], abs=1e-14)


def test_exact_coefficients_carry_rationals(tmp_path):
    code, text = _run(tmp_path, 'coeffs.json', 'coeffs', '--k', '3', '--p', '1', '--exact')
    assert code == EXIT_OK
    first = json.loads(text)['body']['entries'][0]
    assert first['j'] == [0, 0, 0]
    assert first['rational'] == '4/3'


def test_repeated_components_have_zero_error(tmp_path):
    code, text = _run(tmp_path, 'mse.json', 'mse', '--k', '2', '--p', '0', '--components', '1,1')
    assert code == EXIT_OK
    assert json.loads(text)['body']['exact_mse'] <= 1e-12


def test_tolerance_picks_the_truncation(tmp_path):
    code, text = _run(tmp_path, 'residual.json', 'residual', '--k', '2', '--tol', '0.01')
    assert code == EXIT_OK
    assert json.loads(text)['body']['p'] == 12


@pytest.mark.parametrize("argv", (['residual', '--bogus'],
                                  ['frobnicate'],
                                  ['residual', '--p', '2', '--tol', '0.1'],
                                  ['residual', '--t', '1', '--T', '0'],
                                  ['mse', '--k', '2', '--components', '1,2,3'],
                                  ['residual', '--basis', 'haar'],
                                  ['sde-demo', '--trials', '100'],
                                  ['coeffs', '--k', '4', '--p', '40']))
def test_usage_errors(tmp_path, argv):
    code, text = _run(tmp_path, 'out.json', *argv)
    assert code == EXIT_USAGE
    assert text is None


def test_capacity_exceeded(tmp_path):
    code, _ = _run(tmp_path, 'out.json', 'residual', '--k', '2', '--tol', '1e-9')
    assert code == EXIT_FAILURE


def test_seed_precedence():
    assert resolve_seed(5, {SEED_ENVIRONMENT: '7'}) == (5, 'flag')
    assert resolve_seed(None, {SEED_ENVIRONMENT: '7'}) == (7, 'environment')
    assert resolve_seed(None, {}) == (DEFAULT_SEED, 'default')
    with pytest.raises(DomainError):
        resolve_seed(None, {SEED_ENVIRONMENT: 'seven'})


def test_header_records_seed_source():
    spec, _ = parse_command(['sample', '--k', '2', '--p', '1'], environ={SEED_ENVIRONMENT: '99'})
    header = spec.to_header()
    assert header['seed'] == 99
    assert header['seed_source'] == 'environment'
    assert header['components'] == [1, 2]
    assert spec.format == 'json'


def test_sde_demo_defaults_to_csv():
    spec, _ = parse_command(['sde-demo'], environ={})
    assert spec.format == 'csv'
    assert spec.steps == (8, 16, 32, 64)


def test_sample_bodies_are_reproducible(tmp_path):
    argv = ['sample', '--k', '3', '--p', '2', '--components', '1,2,1', '--draws', '5', '--seed', '11']
    _, first = _run(tmp_path, 'a.json', *argv)
    _, second = _run(tmp_path, 'b.json', *argv)
    assert body_of(first) == body_of(second)
    assert len(json.loads(first)['body']['values']) == 5


def test_validate_body_does_not_depend_on_workers(tmp_path):
    bodies = []
    for workers in (1, 4, 8):
        code, text = _run(tmp_path, f'validate-{workers}.json', 'validate', '--k', '2', '--p', '1',
                          '--trials', '500', '--N', '64', '--seed', '3', '--workers', str(workers))
        assert code == EXIT_OK
        bodies.append(body_of(text))
    assert bodies[0] == bodies[1] == bodies[2]
    assert json.loads(bodies[0])['comparison'] == 'exact'


def test_csv_output_has_commented_header(tmp_path):
    code, text = _run(tmp_path, 'sample.csv', 'sample', '--p', '1', '--draws', '3', '--format', 'csv')
    assert code == EXIT_OK
    lines = text.splitlines()
    assert lines[0] == '# command: "sample"'
    body = body_of(text).splitlines()
    assert body[0] == 'draw,value'
    assert len(body) == 4


def test_csv_floats_round_trip():
    text = dumps_csv({'k': 2}, ['x'], [[0.1 + 0.2]])
    assert float(body_of(text).splitlines()[1]) == 0.1 + 0.2


def test_table_file_round_trip(tmp_path):
    table = build_table(LegendreBasis(IntegrationInterval(0.0, 0.5)), WeightFunction.one(), 4, k=2)
    path = tmp_path / 'table.json'
    save_table(table, path, header={'note': 'round trip'})
    restored = load_table(path)
    assert (restored.values == table.values).all()
    assert restored.interval == table.interval
