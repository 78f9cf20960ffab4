"""Dataset ingestion package."""
