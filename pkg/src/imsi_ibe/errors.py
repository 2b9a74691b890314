"""Exception hierarchy shared by every module of the package."""


class ImsiIbeError(Exception):
    pass


class ParameterError(ImsiIbeError, ValueError):
    """Invalid group parameters (for example a composite modulus)."""


class SizeError(ImsiIbeError, ValueError):
    """A plaintext or wire field exceeds its size limit."""


class IntegrityError(ImsiIbeError):
    """Ciphertext tag mismatch: wrong key, tampering, or stale identity."""


class ParseError(ImsiIbeError, ValueError):
    pass


class DecodeError(ImsiIbeError, ValueError):
    pass


class TruncatedError(DecodeError):
    pass


class TrailingDataError(DecodeError):
    pass


class UnknownTypeError(DecodeError):
    pass


class FieldError(DecodeError):
    """A field has the wrong length, arity or character set."""


class ProvisioningError(ImsiIbeError):
    pass


class AuthError(ImsiIbeError):
    """Raised by the HN when it refuses to authenticate a subscriber."""

    def __init__(self, cause):
        super().__init__(cause)
        self.cause = cause


class ProtocolAbort(ImsiIbeError):
    """Raised by the UE when it stops a run and sends nothing further."""

    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class ConfigError(ImsiIbeError, ValueError):
    pass


class UnknownScenarioError(ImsiIbeError, ValueError):
    pass
