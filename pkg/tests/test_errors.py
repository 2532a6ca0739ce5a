"""
Tests for the error hierarchy and diagnostic formatting.
"""

import logging

import pytest

from tvcone.errors import (
    BadMagicError,
    ConfigurationError,
    CoverageHoleError,
    GridMismatchError,
    InputError,
    MissingInputError,
    NyquistError,
    ParameterError,
    SolverAbortError,
    TvconeError,
    exit_code_for,
    handle_error,
    log_error,
)


class TestHierarchy:
    """Test error classes and their exit codes."""

    def test_base_class(self):
        for cls in (ConfigurationError, InputError, MissingInputError, SolverAbortError,
                    CoverageHoleError, BadMagicError):
            assert issubclass(cls, TvconeError)

    @pytest.mark.parametrize(
        "error, code",
        [
            (ParameterError("mu must be positive", "mu"), 4),
            (NyquistError("grid too coarse", "x", 4.5, 2.5), 4),
            (GridMismatchError("shapes differ"), 4),
            (MissingInputError("no such file", "a.vol3"), 3),
            (SolverAbortError("non-finite", "shrinkage", 1, 2), 5),
            (BadMagicError("bad magic", "a.vol3"), 6),
            (CoverageHoleError("uncovered voxel"), 1),
            (ValueError("boom"), 1),
        ],
    )
    def test_exit_codes(self, error, code):
        assert exit_code_for(error) == code


class TestHandleError:
    """Test one-line diagnostics."""

    def test_parameter_error(self):
        msg = handle_error(ParameterError("must be positive", "mu"))
        assert msg == "Invalid parameter 'mu': must be positive"

    def test_solver_abort(self):
        msg = handle_error(SolverAbortError("non-finite iterate", "f_update", 2, 17))
        assert "phase 'f_update'" in msg
        assert "outer 2, inner 17" in msg

    def test_nyquist(self):
        msg = handle_error(NyquistError("grid too coarse", "z", 4.512, 2.5))
        assert "z band needs 4.512 cycles/um" in msg
        assert "Nyquist is 2.5" in msg

    def test_missing_input_with_context(self):
        msg = handle_error(MissingInputError("no such file", "truth.vol3"), "eval")
        assert msg == "eval: Missing input 'truth.vol3': no such file"

    def test_format_error_path(self):
        assert handle_error(BadMagicError("bad magic", "x.vol3")) == "x.vol3: bad magic"

    def test_single_line(self):
        """Test multi-line messages collapse to one line."""
        assert "\n" not in handle_error(TvconeError("first\nsecond"))

    def test_unexpected_error(self):
        assert handle_error(KeyError("k")) == "KeyError: 'k'"
        assert handle_error(KeyError("k"), verbose=False) == "KeyError"


class TestLogError:
    """Test error logging."""

    def test_expected_error_without_traceback(self, caplog):
        with caplog.at_level(logging.ERROR, logger="tvcone.errors"):
            log_error(ParameterError("bad", "tau"), "regularize")
        assert "regularize: Invalid parameter 'tau': bad" in caplog.text
        assert caplog.records[-1].exc_info is None

    def test_unexpected_error_with_traceback(self, caplog):
        with caplog.at_level(logging.ERROR, logger="tvcone.errors"):
            try:
                raise RuntimeError("kaput")
            except RuntimeError as e:
                log_error(e)
        assert caplog.records[-1].exc_info is not None
