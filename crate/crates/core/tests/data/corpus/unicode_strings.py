greeting = "γειά σου κόσμε"
emoji = "🐍 rocks"
print(greeting, emoji, "日本語")
