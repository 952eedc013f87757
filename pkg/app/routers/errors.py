from fastapi import HTTPException

from app.core.errors import InputError, KobpathError, NumericalError, PropertyError


def http_error(err: KobpathError) -> HTTPException:
    """InputError -> 400, PropertyError -> 409, NumericalError -> 500."""
    detail = {"error": type(err).__name__, "message": str(err)}
    witness = getattr(err, "witness", None)
    if witness is not None:
        detail["witness"] = list(witness)
    report = getattr(err, "report", None)
    if report is not None:
        detail["report"] = report.to_json()
    if isinstance(err, InputError):
        return HTTPException(status_code=400, detail=detail)
    if isinstance(err, PropertyError):
        return HTTPException(status_code=409, detail=detail)
    if isinstance(err, NumericalError):
        return HTTPException(status_code=500, detail=detail)
    return HTTPException(status_code=500, detail=detail)
