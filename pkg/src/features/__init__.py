"""Feature packages for Flex-O."""
