"""Command implementations shared by the CLI and the tool server."""
