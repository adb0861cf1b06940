"""Exception hierarchy.

Three failure families, matched to how callers recover:

- ParameterError: a value is outside its physical or structural range
  (negative resistance, out-of-range neuron index, bad pulse amplitude).
- ProtocolError: individually valid objects combined in an invalid way
  (partial cue not a subset of the stored pattern, pattern/array shape
  mismatch, sensitivity analysis on a run that never converged).
- ConfigError: a config file, environment override, or CLI flag could not
  be turned into a runnable configuration.
- OutputError: a result could not be written where it was asked to go.
"""


class PcmxbarError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(PcmxbarError, ValueError):
    """A parameter value is outside its allowed range."""


class ProtocolError(PcmxbarError, ValueError):
    """Valid pieces were combined into an invalid experiment."""


class ConfigError(PcmxbarError, ValueError):
    """A configuration source could not be parsed or validated."""


class OutputError(PcmxbarError, OSError):
    """An output file or directory could not be written."""
