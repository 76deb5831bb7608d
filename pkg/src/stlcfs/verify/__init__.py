from stlcfs.verify.schemas import CheckResult, VerificationReport
from stlcfs.verify.checks import stl_margin_trace, verify

__all__ = ["CheckResult", "VerificationReport", "stl_margin_trace", "verify"]
