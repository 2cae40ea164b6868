"""ludus: a game-semantic virtual machine with a PCF front end."""

__version__ = "0.1.0"
