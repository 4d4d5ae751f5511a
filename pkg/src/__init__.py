"""Flex-O source package."""
