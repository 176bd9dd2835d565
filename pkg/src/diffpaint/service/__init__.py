"""Job service and CLI around the paint engine."""
