from .schemas import (CascadeRequest, CensusRequest, CertifyRequest, ErrorReport, ForgeRequest,
                      IntervalRequest, JobResult, KamRequest)

__all__ = ["CascadeRequest", "CensusRequest", "CertifyRequest", "ErrorReport", "ForgeRequest",
           "IntervalRequest", "JobResult", "KamRequest"]
