"""
Parser dei file di input: dati di mercato, leverage calibrata e configurazione.
"""
