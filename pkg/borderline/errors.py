"""Exception hierarchy shared by the library and the CLI."""


class BorderlineError(Exception):
    """Base error carrying a short machine-readable code."""

    code = 'borderline_error'

    def __init__(self, message, code=None, details=None):
        super().__init__(message)
        self.message = message
        if code:
            self.code = code
        self.details = details or {}

    def to_dict(self):
        payload = {'code': self.code, 'message': self.message}
        if self.details:
            payload['details'] = self.details
        return payload


class ConfigError(BorderlineError):
    code = 'config_error'


class ScalarError(BorderlineError):
    code = 'scalar_error'


class RootDataError(BorderlineError):
    code = 'root_data_error'


class ModuleError(BorderlineError):
    code = 'module_error'


class ConventionFault(ModuleError):
    """A propagated vector failed the singularity test."""

    code = 'convention_fault'


class DecompositionError(BorderlineError):
    code = 'decomposition_error'


class TraceError(BorderlineError):
    code = 'trace_error'


class PresentationError(BorderlineError):
    code = 'presentation_error'
