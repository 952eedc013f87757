#!/usr/bin/env python3
"""
Start the HTTP surface with uvicorn.

    python start_server.py            # 127.0.0.1:8000
    KOBPATH_PORT=9000 python start_server.py
"""

import os

import uvicorn

if __name__ == "__main__":
    uvicorn.run(
        "app.main:app",
        host=os.getenv("KOBPATH_HOST", "127.0.0.1"),
        port=int(os.getenv("KOBPATH_PORT", "8000")),
        log_level=os.getenv("KOBPATH_LOG_LEVEL", "info").lower(),
    )
