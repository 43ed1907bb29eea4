int run(char cmd[]) {
    system(cmd); // sink:a
    return 0;
}

int main(int fd) {
    char buf[128];
    read(fd, buf, 128); // source:a
    run(buf);
    return 0;
}
