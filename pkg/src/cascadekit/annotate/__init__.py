from .store import (
    AnnotateStore,
    CoverageMismatch,
    DuplicateRating,
    ItemMeta,
    OutOfRange,
    PresentationItem,
    RatingRecord,
    Session,
    SessionFinalized,
    UnknownItemKey,
    UnknownSession,
    build_session,
    meta_from_items,
)

__all__ = [
    "AnnotateStore",
    "CoverageMismatch",
    "DuplicateRating",
    "ItemMeta",
    "OutOfRange",
    "PresentationItem",
    "RatingRecord",
    "Session",
    "SessionFinalized",
    "UnknownItemKey",
    "UnknownSession",
    "build_session",
    "meta_from_items",
]
