"""Tests for problem-file models, loading and compilation."""

from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError

from vicar.algebra.zero import DomainBox
from vicar.errors import ProblemFileError
from vicar.problem.loader import (
    compile_problem,
    load_problem,
    positive_symbols,
    read_problem,
    validate_problem,
)
from vicar.problem.model import ProblemFile
from vicar.selftest import GOLDEN_DIR


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _data(**overrides) -> dict:
    data = {
        "name": "oscillators",
        "n": 2,
        "coordinates": ["x", "y"],
        "velocities": ["u", "v"],
        "equations": ["-x", "-2*y"],
    }
    data.update(overrides)
    return data


def _write(tmp_path: Path, data, name: str = "problem.vicar") -> Path:
    path = tmp_path / name
    path.write_text(yaml.dump(data) if not isinstance(data, str) else data)
    return path


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

class TestProblemModel:

    def test_minimal_file(self):
        problem = ProblemFile.model_validate(_data())
        assert problem.time == "t"
        assert problem.samples == 16
        assert not problem.has_candidate

    def test_numbers_become_expressions(self):
        problem = ProblemFile.model_validate(_data(equations=[0, -1]))
        assert problem.equations == ["0", "-1"]

    def test_equation_count(self):
        with pytest.raises(ValidationError, match="'equations' has 1 entries but n = 2"):
            ProblemFile.model_validate(_data(equations=["-x"]))

    def test_box_bounds(self):
        with pytest.raises(ValidationError, match="needs lower < upper"):
            ProblemFile.model_validate(_data(box={"t": [2, 1]}))

    def test_box_undeclared_symbol(self):
        with pytest.raises(ValidationError, match="Box entry 'q' is not a declared symbol"):
            ProblemFile.model_validate(_data(box={"q": [0, 1]}))

    def test_samples_minimum(self):
        with pytest.raises(ValidationError, match="greater than or equal to 4"):
            ProblemFile.model_validate(_data(samples=2))

    def test_eigen_requires_vectors(self):
        with pytest.raises(ValidationError, match="must be given together"):
            ProblemFile.model_validate(_data(eigen={"lambda": ["1", "2"]}))

    def test_eigen_shape(self):
        eigen = {"lambda": ["1", "2"], "vectors": [["1", "0"], ["0"]]}
        with pytest.raises(ValidationError, match="2 eigenvectors of length 2"):
            ProblemFile.model_validate(_data(eigen=eigen))

    def test_multiplier_shape(self):
        with pytest.raises(ValidationError, match="2x2 matrix"):
            ProblemFile.model_validate(_data(multiplier=[["1", "0"]]))

    def test_cartan_vector_is_diagonal(self):
        problem = ProblemFile.model_validate(_data(cartan={"r": ["1", "2"]}))
        assert problem.cartan.is_diagonal
        assert problem.has_candidate

    def test_cartan_size(self):
        with pytest.raises(ValidationError, match="'cartan.r' must have 2 entries"):
            ProblemFile.model_validate(_data(cartan={"r": ["1"]}))

    def test_pfaffian_labels(self):
        cartan = {"r": ["1", "2"], "pfaffian": {"r_alpha": {3: "v"}}}
        with pytest.raises(ValidationError, match="out of range 1..2"):
            ProblemFile.model_validate(_data(cartan=cartan))


# ---------------------------------------------------------------------------
# Loading and compilation
# ---------------------------------------------------------------------------

class TestLoader:

    def test_missing_file(self, tmp_path):
        with pytest.raises(ProblemFileError, match="not found"):
            read_problem(tmp_path / "absent.vicar")

    def test_invalid_yaml(self, tmp_path):
        path = _write(tmp_path, "name: [unclosed")
        with pytest.raises(ProblemFileError, match="Invalid YAML"):
            read_problem(path)

    def test_not_a_mapping(self, tmp_path):
        path = _write(tmp_path, "- just\n- a list\n")
        with pytest.raises(ProblemFileError, match="Expected YAML mapping, got list"):
            read_problem(path)

    def test_schema_errors_name_the_file(self, tmp_path):
        path = _write(tmp_path, _data(equations=["-x"]))
        with pytest.raises(ProblemFileError) as excinfo:
            read_problem(path)
        assert excinfo.value.messages[0].startswith("problem.vicar [root]")

    def test_all_expression_errors_collected(self):
        problem = ProblemFile.model_validate(_data(equations=["x +", "q"]))
        with pytest.raises(ProblemFileError) as excinfo:
            compile_problem(problem)
        messages = excinfo.value.messages
        assert len(messages) == 2
        assert messages[0].startswith("problem [equations -> 1]")
        assert "Unknown identifier 'q'" in messages[1]

    def test_asymmetric_multiplier_rejected(self):
        problem = ProblemFile.model_validate(_data(multiplier=[["1", "t"], ["0", "1"]]))
        with pytest.raises(ProblemFileError) as excinfo:
            compile_problem(problem)
        messages = excinfo.value.messages
        assert len(messages) == 1
        assert messages[0].startswith("problem [multiplier -> 1 -> 2]")
        assert "not symmetric" in messages[0]

    def test_multiplier_symmetric_after_simplification(self):
        rows = [["1", "sin(x)^2 + cos(x)^2"], ["1", "1"]]
        compiled = compile_problem(ProblemFile.model_validate(_data(multiplier=rows)))
        assert len(compiled.multiplier) == 2

    def test_parameters_substituted(self):
        data = _data(parameters={"k": "1/2"}, equations=["-k*x", "-y"])
        problem = ProblemFile.model_validate(data)
        compiled = compile_problem(problem)
        x = compiled.symbols.lookup("x")
        assert compiled.sode.F[0] == -x / 2

    def test_parameters_must_be_rational(self):
        data = _data(parameters={"k": "sqrt(2)"}, equations=["-k*x", "-y"])
        problem = ProblemFile.model_validate(data)
        with pytest.raises(ProblemFileError, match="exact rational"):
            compile_problem(problem)

    def test_positive_symbols(self):
        data = _data(guards=["v", "x^2 + 1"], box={"t": [1, 2], "y": [0, 1]})
        problem = ProblemFile.model_validate(data)
        assert positive_symbols(problem) == {"v", "t"}

    def test_guard_violation(self, tmp_path):
        path = _write(tmp_path, _data(guards=["x"]))
        errors = validate_problem(path)
        assert len(errors) == 1
        assert "'x' is not positive on the box" in errors[0]

    def test_guard_satisfied(self, tmp_path):
        path = _write(tmp_path, _data(guards=["x"], box={"x": [1, 2]}))
        assert validate_problem(path) == []

    def test_guard_points_follow_seed_override(self, tmp_path, monkeypatch):
        seeds = []
        original = DomainBox.sample

        def sample(box, symbols, count, seed):
            seeds.append(seed)
            return original(box, symbols, count, seed)

        monkeypatch.setattr(DomainBox, "sample", sample)
        path = _write(tmp_path, _data(guards=["x"], box={"x": [1, 2]}, seed=3))
        assert validate_problem(path) == []
        assert validate_problem(path, seed=9) == []
        assert seeds == [3, 9]

    def test_golden_problems_are_valid(self):
        for path in sorted(GOLDEN_DIR.glob("*.vicar")):
            assert validate_problem(path) == [], path.name

    def test_candidates_compiled(self):
        compiled = load_problem(GOLDEN_DIR / "example2.vicar")
        assert len(compiled.multiplier) == 3
        assert compiled.cartan_r[1][1] == -compiled.cartan_r[0][0]
        assert compiled.cartan_r[0][1] == 0
        assert compiled.r_alpha[3] == compiled.symbols.lookup("v")
        assert compiled.r1_tilde == compiled.cartan_r[0][0]
